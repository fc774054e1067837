#include "hazsim/heat.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

namespace {

// month lengths on the leap-padded calendar
constexpr int kMonthLengths[12] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

std::array<double, 12> month_centers() {
  std::array<double, 12> c{};
  double start = 0;
  for (int m = 0; m < 12; ++m) {
    c[static_cast<std::size_t>(m)] = start + kMonthLengths[m] / 2.0;
    start += kMonthLengths[m];
  }
  return c;
}

int month_of_day(int day0) {  // 0-based day -> month index
  int m = 0, acc = 0;
  while (m < 11 && day0 >= acc + kMonthLengths[m]) acc += kMonthLengths[m++];
  return m;
}

}  // namespace

std::array<double, 12> HeatClimatology::sample_monthly_t2m() const {
  std::array<double, 12> sum{};
  std::array<long, 12> count{};
  for (const auto& y : years)
    for (int d = 0; d < kDaysPerYear; ++d) {
      const int m = month_of_day(d);
      sum[static_cast<std::size_t>(m)] += y.t2m_c[static_cast<std::size_t>(d)];
      ++count[static_cast<std::size_t>(m)];
    }
  std::array<double, 12> mean{};
  for (int m = 0; m < 12; ++m)
    mean[static_cast<std::size_t>(m)] =
        sum[static_cast<std::size_t>(m)] / static_cast<double>(count[static_cast<std::size_t>(m)]);
  return mean;
}

void HeatClimatology::validate() const {
  if (years.empty()) throw ValidationError("climatology: no sample years");
  for (std::size_t y = 0; y < years.size(); ++y) {
    const auto& s = years[y];
    if (s.t2m_c.size() != kDaysPerYear || s.q_kgkg.size() != kDaysPerYear ||
        s.p_hpa.size() != kDaysPerYear)
      throw ValidationError("climatology year " + std::to_string(y) +
                            ": series must cover 366 days");
    for (int d = 0; d < kDaysPerYear; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      if (s.t2m_c[ud] < -50 || s.t2m_c[ud] > 60)
        throw ValidationError("climatology year " + std::to_string(y) + " day " +
                              std::to_string(d + 1) + ": temperature outside [-50, 60] C");
      if (s.q_kgkg[ud] < 0)
        throw ValidationError("climatology year " + std::to_string(y) + " day " +
                              std::to_string(d + 1) + ": negative specific humidity");
      if (s.p_hpa[ud] < 800 || s.p_hpa[ud] > 1100)
        throw ValidationError("climatology year " + std::to_string(y) + " day " +
                              std::to_string(d + 1) + ": pressure outside [800, 1100] hPa");
    }
  }
}

HeatClimatology load_climatology(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j,
               {"climate_label", "years", "reference_monthly_t2m",
                "model_hist_monthly_t2m", "samples"},
               path);
  HeatClimatology clim;
  clim.climate_label = get_or<std::string>(j, "climate_label", "", path);
  auto read_monthly = [&](const char* key) -> std::optional<std::array<double, 12>> {
    if (!j.contains(key)) return std::nullopt;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 12)
      throw ParseError(path + ": " + key + " needs 12 values");
    std::array<double, 12> arr{};
    std::copy(v.begin(), v.end(), arr.begin());
    return arr;
  };
  clim.reference_monthly_t2m = read_monthly("reference_monthly_t2m");
  clim.model_hist_monthly_t2m = read_monthly("model_hist_monthly_t2m");
  if (clim.reference_monthly_t2m.has_value() != clim.model_hist_monthly_t2m.has_value())
    throw ParseError(path +
                     ": reference_monthly_t2m and model_hist_monthly_t2m must be "
                     "given together");
  const long declared = get_required<long>(j, "years", path);
  for (const auto& y : j.at("samples")) {
    require_keys(y, {"t2m_c", "q_kgkg", "p_hpa"}, path + " sample year");
    YearSample s;
    s.t2m_c = get_required<std::vector<double>>(y, "t2m_c", path);
    s.q_kgkg = get_required<std::vector<double>>(y, "q_kgkg", path);
    s.p_hpa = get_required<std::vector<double>>(y, "p_hpa", path);
    clim.years.push_back(std::move(s));
  }
  if (declared != static_cast<long>(clim.years.size()))
    throw ParseError(path + ": header declares " + std::to_string(declared) +
                     " years, file has " + std::to_string(clim.years.size()));
  clim.validate();
  return clim;
}

void save_climatology(const HeatClimatology& clim, const std::string& path) {
  json j;
  j["climate_label"] = clim.climate_label;
  j["years"] = clim.years.size();
  if (clim.reference_monthly_t2m)
    j["reference_monthly_t2m"] =
        std::vector<double>(clim.reference_monthly_t2m->begin(),
                            clim.reference_monthly_t2m->end());
  if (clim.model_hist_monthly_t2m)
    j["model_hist_monthly_t2m"] =
        std::vector<double>(clim.model_hist_monthly_t2m->begin(),
                            clim.model_hist_monthly_t2m->end());
  j["samples"] = json::array();
  for (const auto& y : clim.years)
    j["samples"].push_back(
        {{"t2m_c", y.t2m_c}, {"q_kgkg", y.q_kgkg}, {"p_hpa", y.p_hpa}});
  save_json_file(j, path, 0);
}

double saturation_vapor_pressure_hpa(double t_c) {
  return 6.112 * std::exp(17.62 * t_c / (243.12 + t_c));
}

double relative_humidity_pct(double t_c, double q_kgkg, double p_hpa) {
  const double e = q_kgkg * p_hpa / (0.622 + 0.378 * q_kgkg);
  const double es = saturation_vapor_pressure_hpa(t_c);
  return std::clamp(100.0 * e / es, 0.0, 100.0);
}

double specific_humidity_from_rh(double t_c, double rh_pct, double p_hpa) {
  const double e = rh_pct / 100.0 * saturation_vapor_pressure_hpa(t_c);
  return 0.622 * e / (p_hpa - 0.378 * e);
}

double heat_index_from_rh_c(double t_c, double rh_pct) {
  constexpr double kFloorC = 26.7;  // ~80 F, below which the regression is invalid
  if (t_c <= kFloorC) return t_c;
  const double T = t_c * 9.0 / 5.0 + 32.0;
  const double R = std::clamp(rh_pct, 0.0, 100.0);

  double hi = -42.379 + 2.04901523 * T + 10.14333127 * R - 0.22475541 * T * R -
              6.83783e-3 * T * T - 5.481717e-2 * R * R + 1.22874e-3 * T * T * R +
              8.5282e-4 * T * R * R - 1.99e-6 * T * T * R * R;
  if (R < 13.0 && T >= 80.0 && T <= 112.0)
    hi -= ((13.0 - R) / 4.0) * std::sqrt((17.0 - std::abs(T - 95.0)) / 17.0);
  else if (R > 85.0 && T >= 80.0 && T <= 87.0)
    hi += ((R - 85.0) / 10.0) * ((87.0 - T) / 2.0);
  return (hi - 32.0) * 5.0 / 9.0;
}

double heat_index_c(double t_c, double q_kgkg, double p_hpa) {
  return heat_index_from_rh_c(t_c, relative_humidity_pct(t_c, q_kgkg, p_hpa));
}

std::array<double, kDaysPerYear> monthly_bias_daily_offsets(
    const std::array<double, 12>& model_monthly,
    const std::array<double, 12>& reference_monthly) {
  const auto centers = month_centers();
  std::array<double, 12> delta{};
  for (int m = 0; m < 12; ++m)
    delta[static_cast<std::size_t>(m)] = reference_monthly[static_cast<std::size_t>(m)] -
                                         model_monthly[static_cast<std::size_t>(m)];

  // periodic cubic spline: solve for second derivatives M with wrap-around
  constexpr int N = 12;
  constexpr double kPeriod = 366.0;
  std::array<double, N> h{};
  for (int i = 0; i < N; ++i) {
    const double next = i + 1 < N ? centers[static_cast<std::size_t>(i + 1)]
                                  : centers[0] + kPeriod;
    h[static_cast<std::size_t>(i)] = next - centers[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd rhs(N);
  for (int i = 0; i < N; ++i) {
    const int prev = (i + N - 1) % N;
    const int next = (i + 1) % N;
    const double hp = h[static_cast<std::size_t>(prev)];
    const double hi = h[static_cast<std::size_t>(i)];
    A(i, prev) += hp / 6.0;
    A(i, i) += (hp + hi) / 3.0;
    A(i, next) += hi / 6.0;
    rhs(i) = (delta[static_cast<std::size_t>(next)] - delta[static_cast<std::size_t>(i)]) / hi -
             (delta[static_cast<std::size_t>(i)] - delta[static_cast<std::size_t>(prev)]) / hp;
  }
  const Eigen::VectorXd M = A.partialPivLu().solve(rhs);

  auto eval = [&](double x) {
    // locate the interval, wrapping around the year boundary
    x = std::fmod(x - centers[0] + kPeriod, kPeriod) + centers[0];
    int i = N - 1;
    for (int m = 0; m < N - 1; ++m)
      if (x >= centers[static_cast<std::size_t>(m)] &&
          x < centers[static_cast<std::size_t>(m + 1)]) {
        i = m;
        break;
      }
    const int next = (i + 1) % N;
    const double hi = h[static_cast<std::size_t>(i)];
    const double a = (i + 1 < N ? centers[static_cast<std::size_t>(next)]
                                : centers[0] + kPeriod) - x;
    const double b = x - centers[static_cast<std::size_t>(i)];
    return (M(i) * a * a * a + M(next) * b * b * b) / (6.0 * hi) +
           (delta[static_cast<std::size_t>(i)] / hi - M(i) * hi / 6.0) * a +
           (delta[static_cast<std::size_t>(next)] / hi - M(next) * hi / 6.0) * b;
  };

  std::array<double, kDaysPerYear> daily{};
  for (int d = 0; d < kDaysPerYear; ++d)
    daily[static_cast<std::size_t>(d)] = eval(static_cast<double>(d) + 0.5);
  return daily;
}

std::vector<double> bias_correct_temperature(
    const std::vector<double>& series, int start_day,
    const std::array<double, 12>& model_monthly,
    const std::array<double, 12>& reference_monthly) {
  const auto daily = monthly_bias_daily_offsets(model_monthly, reference_monthly);
  std::vector<double> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const int day = (start_day - 1 + static_cast<int>(k)) % kDaysPerYear;
    out[k] = series[k] + daily[static_cast<std::size_t>(day)];
  }
  return out;
}

HeatEventSeries event_heat_series(const HeatClimatology& clim, int seasonal_day,
                                  int window_days, std::uint64_t seed,
                                  const std::array<double, kDaysPerYear>* t_bias) {
  if (seasonal_day < 1 || seasonal_day > kDaysPerYear)
    throw HazError("event_heat_series: seasonal_day outside 1..366");
  if (window_days < 1) throw HazError("event_heat_series: window must be >= 1");

  RngStream rng(seed);
  const auto& year = clim.years[rng.uniform_index(clim.years.size())];

  HeatEventSeries series;
  series.seasonal_day = seasonal_day;
  series.hi_c.reserve(static_cast<std::size_t>(window_days));
  for (int k = 0; k < window_days; ++k) {
    const int day = (seasonal_day - 1 + k) % kDaysPerYear;
    const auto ud = static_cast<std::size_t>(day);
    double t = year.t2m_c[ud];
    if (t_bias) t += (*t_bias)[ud];
    series.hi_c.push_back(heat_index_c(t, year.q_kgkg[ud], year.p_hpa[ud]));
  }
  return series;
}

HeatEventSeries tc_composite_adjust(const HeatEventSeries& series,
                                    std::span<const double> anomaly_c) {
  HeatEventSeries out = series;
  for (std::size_t k = 0; k < out.hi_c.size() && k < anomaly_c.size(); ++k)
    out.hi_c[k] += anomaly_c[k];
  out.adjusted = true;
  return out;
}

int heatwave_duration_days(std::span<const double> hi_c, double threshold_c) {
  int best = 0, run = 0;
  for (double hi : hi_c) {
    run = hi > threshold_c ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

std::vector<double> load_anomaly_table(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j, {"hi_anomaly_c_by_day"}, path);
  auto v = get_required<std::vector<double>>(j, "hi_anomaly_c_by_day", path);
  if (v.size() != 11)
    throw ParseError(path + ": anomaly table needs 11 day-offset values (days 0..10)");
  return v;
}

void save_anomaly_table(const std::vector<double>& anomaly, const std::string& path) {
  save_json_file(json{{"hi_anomaly_c_by_day", anomaly}}, path);
}

std::vector<double> default_anomaly_table() {
  // placeholder shape: negative right after passage, back to zero by day 10
  return {-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, -0.3, -0.2, -0.1, 0.0, 0.0};
}

}  // namespace hazsim
