#include "hazsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << raw.rdbuf();
  const std::string bytes = buffer.str();

  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  require_keys(j,
               {"network", "grid", "fragility", "resources", "anomaly_table",
                "historical", "future", "ensemble_size", "period_years", "seed",
                "outage_threshold_days", "hi_threshold_c", "heat_window_days",
                "max_duration_days", "relative_risk_floor", "capacity_multiplier",
                "frequency_override", "mw_per_customer", "wind", "wind_time_step_h",
                "series_step_h", "workers", "output_dir", "harden"},
               path);

  RunConfig c;
  c.config_path = path;
  {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    c.config_hash = hex;
  }

  c.network = get_required<std::string>(j, "network", path);
  c.grid = get_required<std::string>(j, "grid", path);
  c.fragility = get_required<std::string>(j, "fragility", path);
  c.resources = get_required<std::string>(j, "resources", path);
  c.anomaly_table = get_or<std::string>(j, "anomaly_table", "", path);

  auto scenario = [&](const json& s, const char* which) {
    require_keys(s, {"catalog", "climatology"}, path + std::string(" ") + which);
    ScenarioConfig sc;
    sc.catalog = get_required<std::string>(s, "catalog", path);
    sc.climatology = get_required<std::string>(s, "climatology", path);
    return sc;
  };
  if (!j.contains("historical"))
    throw ConfigError(path + ": missing 'historical' scenario");
  c.historical = scenario(j.at("historical"), "historical");
  if (j.contains("future")) c.future = scenario(j.at("future"), "future");

  if (!j.contains("seed"))
    throw ConfigError(path + ": 'seed' is required (no wall-clock seeding)");
  c.seed = get_required<std::uint64_t>(j, "seed", path);

  c.ensemble_size = get_or<int>(j, "ensemble_size", c.ensemble_size, path);
  c.period_years = get_or<int>(j, "period_years", c.period_years, path);
  c.outage_threshold_days =
      get_or<int>(j, "outage_threshold_days", c.outage_threshold_days, path);
  c.hi_threshold_c = get_or<double>(j, "hi_threshold_c", c.hi_threshold_c, path);
  c.heat_window_days = get_or<int>(j, "heat_window_days", c.heat_window_days, path);
  c.max_duration_days = get_or<int>(j, "max_duration_days", c.max_duration_days, path);
  c.relative_risk_floor =
      get_or<double>(j, "relative_risk_floor", c.relative_risk_floor, path);
  c.capacity_multiplier =
      get_or<double>(j, "capacity_multiplier", c.capacity_multiplier, path);
  c.frequency_override =
      get_or<bool>(j, "frequency_override", c.frequency_override, path);
  c.mw_per_customer = get_or<double>(j, "mw_per_customer", c.mw_per_customer, path);
  c.wind_time_step_h = get_or<double>(j, "wind_time_step_h", c.wind_time_step_h, path);
  c.series_step_h = get_or<double>(j, "series_step_h", c.series_step_h, path);
  c.workers = get_or<int>(j, "workers", c.workers, path);
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, path);

  if (j.contains("wind")) {
    const auto& w = j.at("wind");
    require_keys(w,
                 {"holland_b", "background_fraction", "background_rotation_deg",
                  "swrf", "gust_factor"},
                 path + " wind");
    c.wind.holland_b = get_or<double>(w, "holland_b", c.wind.holland_b, path);
    c.wind.background_fraction =
        get_or<double>(w, "background_fraction", c.wind.background_fraction, path);
    c.wind.background_rotation_deg = get_or<double>(
        w, "background_rotation_deg", c.wind.background_rotation_deg, path);
    c.wind.swrf = get_or<double>(w, "swrf", c.wind.swrf, path);
    c.wind.gust_factor = get_or<double>(w, "gust_factor", c.wind.gust_factor, path);
  }
  if (j.contains("harden")) {
    const auto& h = j.at("harden");
    require_keys(h, {"rates", "strategies", "ensemble_size"}, path + " harden");
    c.harden.rates = get_or<std::vector<double>>(h, "rates", c.harden.rates, path);
    c.harden.strategies =
        get_or<std::vector<std::string>>(h, "strategies", c.harden.strategies, path);
    c.harden.ensemble_size =
        get_or<int>(h, "ensemble_size", c.harden.ensemble_size, path);
  }

  if (c.ensemble_size < 1) throw ConfigError(path + ": ensemble_size must be >= 1");
  if (c.period_years < 1) throw ConfigError(path + ": period_years must be >= 1");
  if (c.heat_window_days < 1) throw ConfigError(path + ": heat_window_days must be >= 1");
  if (c.capacity_multiplier <= 0)
    throw ConfigError(path + ": capacity_multiplier must be positive");
  c.wind.validate();
  return c;
}

}  // namespace hazsim
