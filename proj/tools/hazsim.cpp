#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hazsim/commands.hpp"
#include "hazsim/errors.hpp"

namespace {

int dispatch(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const hazsim::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hazsim::kExitValidation;
  } catch (const hazsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hazsim::kExitValidation;
  } catch (const hazsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hazsim::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hazsim::kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hazsim: hurricane-blackout-heatwave compound hazard simulator for a "
      "regional power system"};
  app.require_subcommand(1);

  std::string config_path;
  hazsim::RunOverrides ov;

  auto add_common = [&](CLI::App* cmd, bool with_ensemble = true) {
    cmd->add_option("-c,--config", config_path, "run config file")->required();
    cmd->add_option("-w,--workers", ov.workers, "worker thread count (0 = all cores)");
    cmd->add_option("-o,--output-dir", ov.output_dir, "output directory override");
    if (with_ensemble)
      cmd->add_option("-n,--ensemble-size", ov.ensemble_size,
                      "override the configured ensemble size");
  };

  auto* validate = app.add_subcommand("validate", "check every referenced input file");
  validate->add_option("-c,--config", config_path, "run config file")->required();

  auto* simulate = app.add_subcommand(
      "simulate", "run the Monte Carlo ensemble and write risk tables");
  add_common(simulate);

  auto* scaling = app.add_subcommand(
      "scaling", "disruption scaling law W(x)/P(x) over the historical ensemble");
  add_common(scaling);

  auto* harden =
      app.add_subcommand("harden", "evaluate undergrounding strategies by rate");
  add_common(harden);

  auto* calibrate = app.add_subcommand(
      "calibrate", "fit fragility medians and crew counts to event targets");
  std::string targets_path;
  add_common(calibrate, false);
  calibrate->add_option("-t,--targets", targets_path, "targets file")->required();

  auto* fixtures = app.add_subcommand(
      "fixtures", "generate the synthetic input file set from a seed");
  std::uint64_t fx_seed = 1;
  double fx_scale = 1.0;
  std::string fx_dir = "fixtures";
  fixtures->add_option("-s,--seed", fx_seed, "generator seed")->required();
  fixtures->add_option("--scale", fx_scale, "relative size of the synthetic system");
  fixtures->add_option("-o,--output-dir", fx_dir, "destination directory");

  auto* plot = app.add_subcommand("emit-plot-data",
                                  "reshape an output table into long form");
  std::string plot_in, plot_out;
  plot->add_option("-i,--input", plot_in, "table csv")->required();
  plot->add_option("-o,--output", plot_out, "long-form csv")->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed())
    return dispatch([&] {
      return hazsim::cmd_validate(hazsim::RunConfig::load(config_path), std::cout);
    });
  if (simulate->parsed())
    return dispatch([&] {
      return hazsim::cmd_simulate(hazsim::RunConfig::load(config_path), ov, std::cout);
    });
  if (scaling->parsed())
    return dispatch([&] {
      return hazsim::cmd_scaling(hazsim::RunConfig::load(config_path), ov, std::cout);
    });
  if (harden->parsed())
    return dispatch([&] {
      return hazsim::cmd_harden(hazsim::RunConfig::load(config_path), ov, std::cout);
    });
  if (calibrate->parsed())
    return dispatch([&] {
      return hazsim::cmd_calibrate(hazsim::RunConfig::load(config_path), targets_path,
                                   ov, std::cout);
    });
  if (fixtures->parsed())
    return dispatch([&] { return hazsim::cmd_fixtures(fx_seed, fx_scale, fx_dir, std::cout); });
  if (plot->parsed())
    return dispatch([&] { return hazsim::cmd_emit_plot_data(plot_in, plot_out, std::cout); });
  return 1;
}
