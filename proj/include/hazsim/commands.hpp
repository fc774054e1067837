#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "hazsim/config.hpp"
#include "hazsim/fixtures.hpp"
#include "hazsim/harden.hpp"
#include "hazsim/risk.hpp"

namespace hazsim {

// exit codes shared by every subcommand
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Everything a run needs, loaded and validated once.
struct Workspace {
  RunConfig cfg;
  PowerNetwork network;
  StudyGrid grid;
  FragilitySet fragility;
  RepairResources resources;
  std::vector<double> anomaly;
  StormCatalog catalog_historical;
  HeatClimatology climatology_historical;
  std::optional<StormCatalog> catalog_future;
  std::optional<HeatClimatology> climatology_future;
  CatalogDiagnostics diagnostics;
};

Workspace load_workspace(const RunConfig& cfg);
SimulationContext make_context(const Workspace& ws, bool future);

// Overrides applied on top of the config (CLI flags); zero values keep the
// config's choice.
struct RunOverrides {
  int workers = 0;
  std::string output_dir;  // also overridable via HAZSIM_OUTPUT_DIR
  int ensemble_size = 0;
};

int cmd_validate(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log);
int cmd_scaling(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log);
int cmd_harden(const RunConfig& cfg, const RunOverrides& ov, std::ostream& log);
int cmd_calibrate(const RunConfig& cfg, const std::string& targets_path,
                  const RunOverrides& ov, std::ostream& log);
int cmd_fixtures(std::uint64_t seed, double scale, const std::string& out_dir,
                 std::ostream& log);
int cmd_emit_plot_data(const std::string& table_csv, const std::string& out_csv,
                       std::ostream& log);

std::string resolve_output_dir(const RunConfig& cfg, const RunOverrides& ov);

}  // namespace hazsim
