#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hazsim/windfield.hpp"

namespace hazsim {

struct ScenarioConfig {
  std::string catalog;
  std::string climatology;
};

struct HardenSection {
  std::vector<double> rates{0.0, 0.05};
  std::vector<std::string> strategies{"greedy_distribution", "random_distribution",
                                      "random_transmission"};
  int ensemble_size = 300;
};

// One structured config file drives every subcommand; unknown keys anywhere
// are hard errors and the master seed is mandatory.
struct RunConfig {
  std::string network;
  std::string grid;
  std::string fragility;
  std::string resources;
  std::string anomaly_table;  // optional; built-in default shape otherwise
  ScenarioConfig historical;
  std::optional<ScenarioConfig> future;

  int ensemble_size = 2000;
  int period_years = 20;
  std::uint64_t seed = 0;
  int outage_threshold_days = 5;
  double hi_threshold_c = 40.6;
  int heat_window_days = 30;
  int max_duration_days = 20;
  double relative_risk_floor = 0;  // <= 0 selects 1 / historical event count
  double capacity_multiplier = 1.0;
  bool frequency_override = false;  // future catalog rerun at historical frequency
  double mw_per_customer = 0.003;
  WindParams wind;
  double wind_time_step_h = 1.0;
  double series_step_h = 3.0;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
  HardenSection harden;

  std::string config_path;
  std::string config_hash;  // FNV-1a of the file bytes, hex

  static RunConfig load(const std::string& path);
};

}  // namespace hazsim
