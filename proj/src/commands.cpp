#include "hazsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

namespace fs = std::filesystem;

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// plot-ready tables, emitted both delimiter-separated and structured
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw HazError("cannot write " + path);
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows)
      for (std::size_t c = 0; c < row.size(); ++c)
        out << row[c] << (c + 1 < row.size() ? "," : "\n");
  }

  void write_json(const std::string& path) const {
    json j;
    j["columns"] = columns;
    j["rows"] = json::array();
    for (const auto& row : rows) j["rows"].push_back(row);
    save_json_file(j, path);
  }

  void write_both(const std::string& stem) const {
    write_csv(stem + ".csv");
    write_json(stem + ".json");
  }
};

std::string resolve_against(const std::string& base_file, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base_file).parent_path() / path).string();
}

}  // namespace

std::string resolve_output_dir(const RunConfig& cfg, const RunOverrides& ov) {
  if (const char* env = std::getenv("HAZSIM_OUTPUT_DIR"); env && *env) return env;
  if (!ov.output_dir.empty()) return ov.output_dir;
  return cfg.output_dir;
}

Workspace load_workspace(const RunConfig& cfg) {
  Workspace ws;
  ws.cfg = cfg;
  const auto& base = cfg.config_path;
  ws.network = load_network(resolve_against(base, cfg.network));
  ws.grid = load_grid(resolve_against(base, cfg.grid));
  ws.fragility = load_fragility(resolve_against(base, cfg.fragility));
  ws.resources = load_resources(resolve_against(base, cfg.resources));
  ws.anomaly = cfg.anomaly_table.empty()
                   ? default_anomaly_table()
                   : load_anomaly_table(resolve_against(base, cfg.anomaly_table));
  ws.catalog_historical =
      load_catalog(resolve_against(base, cfg.historical.catalog), &ws.diagnostics);
  ws.climatology_historical =
      load_climatology(resolve_against(base, cfg.historical.climatology));
  if (cfg.future) {
    ws.catalog_future =
        load_catalog(resolve_against(base, cfg.future->catalog), &ws.diagnostics);
    ws.climatology_future =
        load_climatology(resolve_against(base, cfg.future->climatology));
    if (cfg.frequency_override)
      ws.catalog_future->annual_frequency = ws.catalog_historical.annual_frequency;
  }
  return ws;
}

SimulationContext make_context(const Workspace& ws, bool future) {
  if (future && !ws.catalog_future)
    throw ConfigError("config has no 'future' scenario");
  SimulationContext ctx;
  ctx.network = &ws.network;
  ctx.catalog = future ? &*ws.catalog_future : &ws.catalog_historical;
  ctx.climatology = future ? &*ws.climatology_future : &ws.climatology_historical;
  ctx.grid = ws.grid.locations;
  ctx.fragility = ws.fragility;
  ctx.resources = ws.resources;
  ctx.wind = ws.cfg.wind;
  ctx.wind_time_step_h = ws.cfg.wind_time_step_h;
  ctx.series_step_h = ws.cfg.series_step_h;
  ctx.heat.hi_threshold_c = ws.cfg.hi_threshold_c;
  ctx.heat.window_days = ws.cfg.heat_window_days;
  ctx.heat.anomaly_c = ws.anomaly;
  ctx.mw_per_customer = ws.cfg.mw_per_customer;
  ctx.capacity = CapacityScale{ws.cfg.capacity_multiplier};
  ctx.period_years = ws.cfg.period_years;
  ctx.max_duration_days = ws.cfg.max_duration_days;
  ctx.master_seed = ws.cfg.seed;
  ctx.prepare();
  return ctx;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  json report;
  report["errors"] = json::array();
  report["warnings"] = json::array();
  try {
    const Workspace ws = load_workspace(cfg);
    for (const auto& r : ws.diagnostics.rejected) report["warnings"].push_back(r);
    for (const auto& w : ws.diagnostics.warnings) report["warnings"].push_back(w);
    report["network"] = {{"substations", ws.network.substations.size()},
                         {"transmission_lines", ws.network.lines.size()},
                         {"distribution_nodes", ws.network.idx.n_nodes},
                         {"customers", ws.network.total_customers()}};
    report["storms_historical"] = ws.catalog_historical.storms.size();
    if (ws.catalog_future) report["storms_future"] = ws.catalog_future->storms.size();
  } catch (const std::exception& e) {
    report["errors"].push_back(e.what());
    out << report.dump(1) << '\n';
    return kExitValidation;
  }
  out << report.dump(1) << '\n';
  return kExitOk;
}

namespace {

void write_exceedance_tables(const std::string& dir, const std::string& climate,
                             const ExceedanceTable& table) {
  Table t;
  t.columns = {"d_days", "outage_mean", "outage_sigma"};
  for (double q : kBandQuantiles) t.columns.push_back("outage_q" + fmt_num(q * 100));
  t.columns.push_back("compound_mean");
  t.columns.push_back("compound_sigma");
  for (double q : kBandQuantiles) t.columns.push_back("compound_q" + fmt_num(q * 100));
  for (std::size_t i = 0; i < table.outage.size(); ++i) {
    std::vector<std::string> row{std::to_string(table.outage[i].d),
                                 fmt_num(table.outage[i].mean),
                                 fmt_num(table.outage[i].sigma)};
    for (double q : table.outage[i].quantiles) row.push_back(fmt_num(q));
    row.push_back(fmt_num(table.compound[i].mean));
    row.push_back(fmt_num(table.compound[i].sigma));
    for (double q : table.compound[i].quantiles) row.push_back(fmt_num(q));
    t.add_row(std::move(row));
  }
  t.write_both(dir + "/exceedance_" + climate);
}

void write_tract_table(const std::string& dir, const std::string& climate,
                       const std::vector<TractRiskRow>& rows, int headline_days) {
  Table t;
  const std::string d = std::to_string(headline_days);
  t.columns = {"tract",
               "customers",
               "outage" + d + "d_mean",
               "outage" + d + "d_sigma",
               "compound" + d + "d_mean",
               "compound" + d + "d_sigma"};
  for (const auto& r : rows)
    t.add_row({r.tract, std::to_string(r.customers), fmt_num(r.outage_mean),
               fmt_num(r.outage_sigma), fmt_num(r.compound_mean),
               fmt_num(r.compound_sigma)});
  t.write_both(dir + "/tract_risk_" + climate);
}

void write_period_table(const std::string& dir, const std::string& climate,
                        const EnsembleResult& ens, int headline_days) {
  Table t;
  const auto hd = static_cast<std::size_t>(headline_days - 1);
  t.columns = {"period",        "seed",           "events",
               "outage_exceed", "compound_exceed", "max_restoration_days"};
  for (const auto& p : ens.periods) {
    char seed_hex[32];
    std::snprintf(seed_hex, sizeof seed_hex, "%016llx",
                  static_cast<unsigned long long>(p.seed));
    t.add_row({std::to_string(p.index), seed_hex, std::to_string(p.n_events),
               fmt_num(p.outage_exceed[hd]), fmt_num(p.compound_exceed[hd]),
               fmt_num(p.max_restoration_days)});
  }
  t.write_both(dir + "/period_summary_" + climate);
}

void write_length_risk(const std::string& dir, const std::string& climate,
                       const LengthRiskResult& lr) {
  Table t;
  t.columns = {"tract", "harmonic_mean_km", "sector_count", "outage_fraction"};
  for (const auto& p : lr.points)
    t.add_row({p.tract, fmt_num(p.harmonic_mean_km), std::to_string(p.sector_count),
               fmt_num(p.outage_fraction)});
  t.write_both(dir + "/length_risk_" + climate);
  save_json_file(json{{"slope", lr.fit.slope},
                      {"intercept", lr.fit.intercept},
                      {"slope_se", lr.fit.slope_se},
                      {"intercept_se", lr.fit.intercept_se}},
                 dir + "/length_risk_fit_" + climate + ".json");
}

void write_manifest(const std::string& dir, const RunConfig& cfg,
                    const std::string& command, const std::vector<std::string>& files,
                    const json& extra = json::object()) {
  json j;
  j["command"] = command;
  j["config"] = cfg.config_path;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  j["outputs"] = files;
  for (const auto& item : extra.items()) j[item.key()] = item.value();
  save_json_file(j, dir + "/run_manifest.json");
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  const Workspace ws = load_workspace(cfg);
  const std::string dir = resolve_output_dir(cfg, ov);
  fs::create_directories(dir);
  const int workers = ov.workers > 0 ? ov.workers : cfg.workers;
  const int periods = ov.ensemble_size > 0 ? ov.ensemble_size : cfg.ensemble_size;
  const int d = cfg.outage_threshold_days;

  std::vector<std::string> files;
  SimulationContext hist_ctx = make_context(ws, false);
  const EnsembleResult hist = run_ensemble(hist_ctx, periods, d, workers);
  log << "historical: " << periods << " periods, " << hist.total_events
      << " events\n";
  write_exceedance_tables(dir, "historical", exceedance_stats(hist));
  write_tract_table(dir, "historical", tract_risk_map(hist_ctx, hist), d);
  write_period_table(dir, "historical", hist, d);
  write_length_risk(dir, "historical", length_risk_correlation(hist_ctx, hist));
  files.insert(files.end(),
               {"exceedance_historical.csv", "tract_risk_historical.csv",
                "period_summary_historical.csv", "length_risk_historical.csv"});

  if (cfg.future) {
    SimulationContext fut_ctx = make_context(ws, true);
    const EnsembleResult fut = run_ensemble(fut_ctx, periods, d, workers);
    log << "future: " << periods << " periods, " << fut.total_events << " events\n";
    write_exceedance_tables(dir, "future", exceedance_stats(fut));
    write_tract_table(dir, "future", tract_risk_map(fut_ctx, fut), d);
    write_period_table(dir, "future", fut, d);
    write_length_risk(dir, "future", length_risk_correlation(fut_ctx, fut));

    const auto curve = heatwave_probability_curve(hist, fut, cfg.relative_risk_floor,
                                                  cfg.heat_window_days);
    Table t;
    t.columns = {"d_days", "p_future", "p_hist", "p_hist_floored", "ratio"};
    for (const auto& row : curve)
      t.add_row({std::to_string(row.d), fmt_num(row.p_future), fmt_num(row.p_hist),
                 fmt_num(row.p_hist_floored), fmt_num(row.ratio)});
    t.write_both(dir + "/relative_risk");
    files.insert(files.end(),
                 {"exceedance_future.csv", "tract_risk_future.csv",
                  "period_summary_future.csv", "length_risk_future.csv",
                  "relative_risk.csv"});
  }
  write_manifest(dir, cfg, "simulate", files,
                 json{{"ensemble_size", periods},
                      {"period_years", cfg.period_years},
                      {"outage_threshold_days", d}});
  log << "outputs in " << dir << "\n";
  return kExitOk;
}

int cmd_scaling(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  const Workspace ws = load_workspace(cfg);
  const std::string dir = resolve_output_dir(cfg, ov);
  fs::create_directories(dir);
  const int workers = ov.workers > 0 ? ov.workers : cfg.workers;
  const int periods = ov.ensemble_size > 0 ? ov.ensemble_size : cfg.ensemble_size;

  SimulationContext ctx = make_context(ws, false);
  ctx.collect_disruptions = true;
  const EnsembleResult ens =
      run_ensemble(ctx, periods, cfg.outage_threshold_days, workers);
  const ScalingCurve curve = scaling_curve(ens.disruption_impacts);
  log << "disruptions: " << curve.n_disruptions << " over " << ens.total_events
      << " events\n";

  Table t;
  t.columns = {"impact_x", "p_exceed", "w_exceed"};
  for (std::size_t i = 0; i < curve.x.size(); ++i)
    t.add_row({fmt_num(curve.x[i]), fmt_num(curve.p[i]), fmt_num(curve.w[i])});
  t.write_both(dir + "/scaling_curve");
  save_json_file(json{{"top20_share", curve.top20_share},
                      {"n_disruptions", curve.n_disruptions},
                      {"total_impact", curve.total_impact},
                      {"events", ens.total_events}},
                 dir + "/scaling_summary.json");
  write_manifest(dir, cfg, "scaling", {"scaling_curve.csv", "scaling_summary.json"},
                 json{{"ensemble_size", periods}});
  return kExitOk;
}

int cmd_harden(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  const Workspace ws = load_workspace(cfg);
  const std::string dir = resolve_output_dir(cfg, ov);
  fs::create_directories(dir);
  const int workers = ov.workers > 0 ? ov.workers : cfg.workers;
  const int periods =
      ov.ensemble_size > 0 ? ov.ensemble_size : cfg.harden.ensemble_size;

  // hardening targets the projected climate when one is configured
  SimulationContext base = make_context(ws, cfg.future.has_value());
  std::vector<double> rates = cfg.harden.rates;
  std::sort(rates.begin(), rates.end());
  const auto table = evaluate_strategies(ws.network, base, cfg.harden.strategies,
                                          rates, periods, cfg.outage_threshold_days,
                                          workers);

  Table t;
  t.columns = {"strategy",      "rate",         "compound_mean",
               "compound_sigma", "outage_mean", "outage_sigma"};
  for (const auto& row : table)
    t.add_row({row.strategy, fmt_num(row.rate), fmt_num(row.compound_mean),
               fmt_num(row.compound_sigma), fmt_num(row.outage_mean),
               fmt_num(row.outage_sigma)});
  t.write_both(dir + "/harden_table");

  std::vector<std::string> files{"harden_table.csv"};
  for (const auto& strategy : cfg.harden.strategies)
    for (double rate : rates) {
      HardeningPlan plan;
      if (strategy == "greedy_distribution")
        plan = greedy_distribution_plan(ws.network, rate);
      else if (strategy == "random_distribution")
        plan = random_distribution_plan(ws.network, rate, cfg.seed);
      else
        plan = random_transmission_plan(ws.network, rate, cfg.seed);
      const std::string name = "plan_" + strategy + "_" + fmt_num(rate) + ".json";
      save_plan(plan, dir + "/" + name);
      files.push_back(name);
    }
  write_manifest(dir, cfg, "harden", files, json{{"ensemble_size", periods}});
  log << "evaluated " << table.size() << " strategy/rate cells\n";
  return kExitOk;
}

namespace {

// mean outage fraction at hour 120 over seeded replays of one storm
double event_outage_metric(const PowerNetwork& net, const StudyGrid& grid,
                           const StormCatalog& cat, const FragilitySet& frag,
                           const RepairResources& res, const RunConfig& cfg,
                           int seeds) {
  const auto& storm = cat.storms.front();
  const WindFieldMap wind =
      event_wind_map(storm, grid.locations, cfg.wind, cfg.wind_time_step_h);
  const WindLookup lookup = build_wind_lookup(net, grid.locations);
  const auto demand = net.bus_demand_mw(cfg.mw_per_customer);

  double acc = 0;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = derive_seed(cfg.seed, fnv1a64("calibration"), s);
    const DamageState dmg = sample_damage(net, wind, lookup, frag, seed);
    if (!dmg.any()) continue;
    const RepairTimeline tl = schedule_repairs(dmg, net, res, derive_seed(seed, 7));
    const OutageTimeSeries series =
        outage_series(net, dmg, tl, demand, CapacityScale{cfg.capacity_multiplier},
                      cfg.series_step_h);
    double level = series.epochs.front().second;
    for (const auto& [t, f] : series.epochs) {
      if (t > 120.0) break;
      level = f;
    }
    acc += level;
  }
  return acc / static_cast<double>(seeds);
}

struct CalTarget {
  std::string name;
  StormCatalog catalog;
  double target = 0;
  double tolerance = 0;
};

}  // namespace

int cmd_calibrate(const RunConfig& cfg, const std::string& targets_path,
                  const RunOverrides& ov, std::ostream& log) {
  const Workspace ws = load_workspace(cfg);
  const std::string dir = resolve_output_dir(cfg, ov);
  fs::create_directories(dir);

  const json tj = load_json_file(targets_path);
  require_keys(tj, {"seeds", "max_evaluations", "targets"}, targets_path);
  const int seeds = get_or<int>(tj, "seeds", 24, targets_path);
  const int max_evals = get_or<int>(tj, "max_evaluations", 80, targets_path);
  std::vector<CalTarget> targets;
  for (const auto& row : tj.at("targets")) {
    require_keys(row, {"name", "catalog", "target", "tolerance"}, targets_path);
    CalTarget t;
    t.name = get_required<std::string>(row, "name", targets_path);
    t.catalog = load_catalog(
        resolve_against(targets_path, get_required<std::string>(row, "catalog", targets_path)));
    t.target = get_required<double>(row, "target", targets_path);
    t.tolerance = get_required<double>(row, "tolerance", targets_path);
    targets.push_back(std::move(t));
  }
  if (targets.empty()) throw ConfigError(targets_path + ": no targets");

  FragilitySet frag = ws.fragility;
  RepairResources res = ws.resources;
  int evaluations = 0;

  auto metrics = [&](const FragilitySet& f, const RepairResources& r) {
    ++evaluations;
    std::vector<double> m;
    for (const auto& t : targets)
      m.push_back(event_outage_metric(ws.network, ws.grid, t.catalog, f, r, cfg, seeds));
    return m;
  };
  auto objective = [&](const std::vector<double>& m) {
    double obj = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double z = (m[i] - targets[i].target) / std::max(1e-6, targets[i].tolerance);
      obj += z * z;
    }
    return obj;
  };
  auto within = [&](const std::vector<double>& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
      if (std::abs(m[i] - targets[i].target) > targets[i].tolerance) return false;
    return true;
  };

  std::vector<double> best_m = metrics(frag, res);
  double best = objective(best_m);
  int iterations = 0;
  bool converged = within(best_m);

  // coordinate search: multiplicative steps on the five medians, unit steps
  // on the two crew counts, shrinking until the targets fit or the budget ends
  double step = 1.18;
  while (!converged && evaluations < max_evals && step > 1.02) {
    bool improved = false;
    for (int coord = 0; coord < kNumComponentClasses + 2 && evaluations < max_evals;
         ++coord) {
      for (int dir_sign : {+1, -1}) {
        if (evaluations >= max_evals) break;
        FragilitySet f2 = frag;
        RepairResources r2 = res;
        if (coord < kNumComponentClasses) {
          auto& median = f2.classes[static_cast<std::size_t>(coord)].median_ms;
          median = std::clamp(dir_sign > 0 ? median * step : median / step, 20.0, 250.0);
        } else if (coord == kNumComponentClasses) {
          r2.distribution_crews = std::max(1, res.distribution_crews + dir_sign);
        } else {
          r2.transmission_crews = std::max(1, res.transmission_crews + dir_sign);
        }
        const auto m2 = metrics(f2, r2);
        const double o2 = objective(m2);
        if (o2 < best - 1e-12) {
          best = o2;
          best_m = m2;
          frag = f2;
          res = r2;
          improved = true;
          ++iterations;
          if (within(best_m)) {
            converged = true;
            break;
          }
        }
      }
      if (converged) break;
    }
    if (!improved) step = std::sqrt(step);
  }

  save_fragility(frag, dir + "/fragility_fitted.json");
  save_resources(res, dir + "/resources_fitted.json");

  json report;
  report["converged"] = converged;
  report["iterations"] = iterations;
  report["evaluations"] = evaluations;
  report["objective"] = best;
  report["targets"] = json::array();
  for (std::size_t i = 0; i < targets.size(); ++i)
    report["targets"].push_back(json{{"name", targets[i].name},
                                     {"target", targets[i].target},
                                     {"tolerance", targets[i].tolerance},
                                     {"achieved", best_m[i]},
                                     {"residual", best_m[i] - targets[i].target}});
  if (!converged)
    report["warning"] = "did not meet every target within tolerance; best-found written";
  save_json_file(report, dir + "/calibration_report.json");
  write_manifest(dir, cfg, "calibrate",
                 {"fragility_fitted.json", "resources_fitted.json",
                  "calibration_report.json"});
  log << (converged ? "calibration converged" : "calibration did not converge")
      << " after " << evaluations << " evaluations\n";
  return kExitOk;
}

int cmd_fixtures(std::uint64_t seed, double scale, const std::string& out_dir,
                 std::ostream& log) {
  write_fixture_files(seed, scale, out_dir);
  log << "fixtures written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_emit_plot_data(const std::string& table_csv, const std::string& out_csv,
                       std::ostream& log) {
  std::ifstream in(table_csv);
  if (!in) throw ConfigError("cannot open table: " + table_csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(table_csv + ": empty table");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const auto header = split(line);
  if (header.size() < 2) throw ParseError(table_csv + ": need at least two columns");

  std::ofstream out(out_csv);
  if (!out) throw HazError("cannot write " + out_csv);
  out << "key,variable,value\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    for (std::size_t c = 1; c < cells.size() && c < header.size(); ++c)
      out << cells[0] << ',' << header[c] << ',' << cells[c] << '\n';
  }
  log << "long-form table written to " << out_csv << "\n";
  return kExitOk;
}

}  // namespace hazsim
