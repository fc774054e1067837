#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hazsim {

inline constexpr int kDaysPerYear = 366;  // leap-padded daily series
inline constexpr double kHiWarningThresholdC = 40.6;

struct YearSample {
  std::vector<double> t2m_c;    // 366 daily values
  std::vector<double> q_kgkg;   // specific humidity
  std::vector<double> p_hpa;    // surface pressure
};

struct HeatClimatology {
  std::string climate_label;
  std::vector<YearSample> years;
  // Monthly mean temperatures of the reference (reanalysis) and of this
  // model's own historical run. When both are present the series is
  // bias-corrected by the spline-interpolated (reference - model) deltas;
  // the deltas come from the historical period, so the projected warming
  // signal in the samples survives the correction.
  std::optional<std::array<double, 12>> reference_monthly_t2m;
  std::optional<std::array<double, 12>> model_hist_monthly_t2m;

  bool bias_correctable() const {
    return reference_monthly_t2m.has_value() && model_hist_monthly_t2m.has_value();
  }
  std::array<double, 12> sample_monthly_t2m() const;  // computed from the samples
  void validate() const;
};

HeatClimatology load_climatology(const std::string& path);
void save_climatology(const HeatClimatology& clim, const std::string& path);

double saturation_vapor_pressure_hpa(double t_c);  // Magnus, over water
double relative_humidity_pct(double t_c, double q_kgkg, double p_hpa);
double specific_humidity_from_rh(double t_c, double rh_pct, double p_hpa);

// Operational heat-index regression with its low-RH / high-RH adjustments;
// below the 26.7 C validity floor the air temperature passes through.
double heat_index_from_rh_c(double t_c, double rh_pct);
double heat_index_c(double t_c, double q_kgkg, double p_hpa);

// Daily temperature corrections from monthly means: periodic cubic spline
// through the twelve (reference - model) deltas at month centers.
std::array<double, kDaysPerYear> monthly_bias_daily_offsets(
    const std::array<double, 12>& model_monthly,
    const std::array<double, 12>& reference_monthly);

// Correction applied to a daily series starting at start_day (1-based).
std::vector<double> bias_correct_temperature(
    const std::vector<double>& series, int start_day,
    const std::array<double, 12>& model_monthly,
    const std::array<double, 12>& reference_monthly);

struct HeatEventSeries {
  int seasonal_day = 1;    // day-of-year of landfall (day 0 of the window)
  std::vector<double> hi_c;
  bool adjusted = false;   // composite hurricane-passage adjustment applied
};

// One post-landfall window drawn from a uniformly chosen climatology year;
// whole-year draws keep day-to-day autocorrelation intact.
HeatEventSeries event_heat_series(const HeatClimatology& clim, int seasonal_day,
                                  int window_days, std::uint64_t seed,
                                  const std::array<double, kDaysPerYear>* t_bias);

// Day-offset HI anomalies (landfall = day 0) added to the series.
HeatEventSeries tc_composite_adjust(const HeatEventSeries& series,
                                    std::span<const double> anomaly_c);

// Longest run of consecutive days with HI strictly above the threshold.
int heatwave_duration_days(std::span<const double> hi_c,
                           double threshold_c = kHiWarningThresholdC);

std::vector<double> load_anomaly_table(const std::string& path);
void save_anomaly_table(const std::vector<double>& anomaly, const std::string& path);
std::vector<double> default_anomaly_table();

}  // namespace hazsim
