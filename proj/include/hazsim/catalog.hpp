#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hazsim/geo.hpp"

namespace hazsim {

// Landfall admission threshold for synthetic storms, m/s.
inline constexpr double kMinLandfallVmax = 22.0;

struct TrackPoint {
  double time_offset_h = 0;  // hours since first point, strictly increasing
  double lat = 0, lon = 0;
  double v_max_ms = 0;   // 1-min max sustained at 10 m
  double r_max_km = 0;   // radius of maximum wind
  double trans_speed_ms = 0;
  double trans_bearing_deg = 0;  // direction of motion, compass
  std::optional<double> pressure_deficit_hpa;
};

struct SyntheticStorm {
  std::string id;
  std::vector<TrackPoint> track;
  int landfall_index = 0;  // track point at closest approach to the study center
  int seasonal_day = 1;    // day of year of landfall (1..366)
  double weight = 1.0;

  double landfall_vmax() const { return track[static_cast<std::size_t>(landfall_index)].v_max_ms; }
};

struct StormCatalog {
  std::vector<SyntheticStorm> storms;
  double annual_frequency = 0;  // storms / year
  std::string climate_label;
  double source_weight = 1.0;
  LatLon study_center{29.76, -95.37};
  // Annual-maximum landfall intensities of this model's historical run;
  // consumed when blending multiple model catalogs.
  std::vector<double> hist_annual_max;

  double total_weight() const;
  const SyntheticStorm* find(const std::string& id) const;
  std::vector<double> landfall_intensities() const;
};

struct CatalogDiagnostics {
  std::vector<std::string> rejected;  // admission failures, one line per storm
  std::vector<std::string> warnings;
};

// Line-delimited catalog file: a header object followed by one storm per line.
StormCatalog load_catalog(const std::string& path, CatalogDiagnostics* diag = nullptr);
void save_catalog(const StormCatalog& cat, const std::string& path);

// Validates invariants and computes landfall indices; used by the loader and
// by in-memory catalog builders (fixtures, blending).
void finalize_catalog(StormCatalog& cat, CatalogDiagnostics* diag = nullptr);

double bias_correct_frequency(double ref_hist_freq, double model_hist_freq,
                              double model_future_freq);

// Importance weights that transport the model-future intensity distribution
// onto the bias-corrected target (model future mapped through the
// historical model->reference quantile map). Normalized to mean 1.
std::vector<double> quantile_map_weights(const std::vector<double>& model_future,
                                         const std::vector<double>& model_hist,
                                         const std::vector<double>& ref_hist,
                                         CatalogDiagnostics* diag = nullptr);

// Merge bias-corrected model catalogs into a single projection. Source
// weights are inverse Cramer-von-Mises distances between each model's
// historical annual-max CDF and the reference's.
StormCatalog blend_catalogs(const std::vector<StormCatalog>& corrected,
                            const std::vector<double>& ref_hist_annual_max);

struct EventSequence {
  struct Event {
    int year = 0;          // 0-based within the period
    int seasonal_day = 1;
    std::string storm_id;
    std::size_t storm_index = 0;  // into the source catalog
  };
  int period_years = 0;
  std::vector<Event> events;  // sorted by (year, seasonal_day)
  std::uint64_t rng_seed = 0;
};

// Stationary compound Poisson resampling: Poisson(annual_frequency) events
// per year, storms drawn with replacement proportionally to weight.
EventSequence resample_period(const StormCatalog& cat, int years, std::uint64_t seed);

}  // namespace hazsim
