#include "hazsim/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"
#include "hazsim/stats.hpp"

namespace hazsim {

double StormCatalog::total_weight() const {
  double w = 0;
  for (const auto& s : storms) w += s.weight;
  return w;
}

const SyntheticStorm* StormCatalog::find(const std::string& id) const {
  for (const auto& s : storms)
    if (s.id == id) return &s;
  return nullptr;
}

std::vector<double> StormCatalog::landfall_intensities() const {
  std::vector<double> v;
  v.reserve(storms.size());
  for (const auto& s : storms) v.push_back(s.landfall_vmax());
  return v;
}

namespace {

void validate_storm(const SyntheticStorm& s) {
  if (s.track.size() < 2)
    throw ParseError("storm " + s.id + ": track needs at least 2 points");
  if (s.weight < 0) throw ParseError("storm " + s.id + ": negative weight");
  if (s.seasonal_day < 1 || s.seasonal_day > 366)
    throw ParseError("storm " + s.id + ": seasonal_day outside 1..366");
  for (std::size_t i = 0; i < s.track.size(); ++i) {
    const auto& p = s.track[i];
    if (p.v_max_ms <= 0)
      throw ParseError("storm " + s.id + ": nonpositive v_max");
    if (p.r_max_km <= 0)
      throw ParseError("storm " + s.id + ": nonpositive r_max");
    if (i > 0 && p.time_offset_h <= s.track[i - 1].time_offset_h)
      throw ParseError("storm " + s.id + ": time_offset not strictly increasing");
  }
}

int closest_approach_index(const SyntheticStorm& s, LatLon center) {
  int best = 0;
  double best_d = haversine_km(LatLon{s.track[0].lat, s.track[0].lon}, center);
  for (std::size_t i = 1; i < s.track.size(); ++i) {
    const double d = haversine_km(LatLon{s.track[i].lat, s.track[i].lon}, center);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

SyntheticStorm parse_storm_line(const json& j) {
  require_keys(j, {"id", "seasonal_day", "weight", "track"}, "storm record");
  SyntheticStorm s;
  s.id = get_required<std::string>(j, "id", "storm record");
  s.seasonal_day = get_required<int>(j, "seasonal_day", "storm " + s.id);
  s.weight = get_required<double>(j, "weight", "storm " + s.id);
  const auto& track = j.at("track");
  if (!track.is_array())
    throw ParseError("storm " + s.id + ": track must be an array");
  for (const auto& row : track) {
    if (!row.is_array() || (row.size() != 7 && row.size() != 8))
      throw ParseError("storm " + s.id +
                       ": track rows are [t_hours, lat, lon, v_max_ms, r_max_km, "
                       "trans_speed_ms, trans_bearing_deg]");
    TrackPoint p;
    p.time_offset_h = row[0].get<double>();
    p.lat = row[1].get<double>();
    p.lon = row[2].get<double>();
    p.v_max_ms = row[3].get<double>();
    p.r_max_km = row[4].get<double>();
    p.trans_speed_ms = row[5].get<double>();
    p.trans_bearing_deg = row[6].get<double>();
    if (row.size() == 8) p.pressure_deficit_hpa = row[7].get<double>();
    s.track.push_back(p);
  }
  return s;
}

json storm_to_json(const SyntheticStorm& s) {
  json track = json::array();
  for (const auto& p : s.track) {
    json row = {p.time_offset_h, p.lat,            p.lon,
                p.v_max_ms,      p.r_max_km,       p.trans_speed_ms,
                p.trans_bearing_deg};
    if (p.pressure_deficit_hpa) row.push_back(*p.pressure_deficit_hpa);
    track.push_back(row);
  }
  return json{{"id", s.id},
              {"seasonal_day", s.seasonal_day},
              {"weight", s.weight},
              {"track", track}};
}

}  // namespace

void finalize_catalog(StormCatalog& cat, CatalogDiagnostics* diag) {
  if (cat.annual_frequency <= 0)
    throw ParseError("catalog " + cat.climate_label + ": annual_frequency must be positive");

  std::vector<SyntheticStorm> admitted;
  std::set<std::string> seen;
  for (auto& s : cat.storms) {
    validate_storm(s);
    if (!seen.insert(s.id).second)
      throw ParseError("catalog " + cat.climate_label + ": duplicate storm id " + s.id);
    s.landfall_index = closest_approach_index(s, cat.study_center);
    if (s.landfall_vmax() < kMinLandfallVmax) {
      if (diag)
        diag->rejected.push_back("storm " + s.id + ": landfall v_max " +
                                 std::to_string(s.landfall_vmax()) +
                                 " m/s below admission threshold");
      continue;
    }
    admitted.push_back(std::move(s));
  }
  cat.storms = std::move(admitted);
  if (cat.storms.empty())
    throw ParseError("catalog " + cat.climate_label + ": empty after admission filtering");
  if (cat.total_weight() <= 0)
    throw ParseError("catalog " + cat.climate_label + ": storm weights sum to zero");
}

StormCatalog load_catalog(const std::string& path, CatalogDiagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog file: " + path);

  StormCatalog cat;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() ||
        line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      require_keys(j,
                   {"annual_frequency", "climate_label", "source_weight",
                    "study_center", "hist_annual_max"},
                   path + " header");
      cat.annual_frequency = get_required<double>(j, "annual_frequency", path);
      cat.climate_label = get_or<std::string>(j, "climate_label", "", path);
      cat.source_weight = get_or<double>(j, "source_weight", 1.0, path);
      if (j.contains("study_center")) {
        const auto& c = j.at("study_center");
        if (!c.is_array() || c.size() != 2)
          throw ParseError(path + ": study_center must be [lat, lon]");
        cat.study_center = LatLon{c[0].get<double>(), c[1].get<double>()};
      }
      cat.hist_annual_max =
          get_or<std::vector<double>>(j, "hist_annual_max", {}, path);
      have_header = true;
      continue;
    }
    cat.storms.push_back(parse_storm_line(j));
  }
  if (!have_header) throw ParseError(path + ": missing catalog header line");
  finalize_catalog(cat, diag);
  return cat;
}

void save_catalog(const StormCatalog& cat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw HazError("cannot write catalog file: " + path);
  json header{{"annual_frequency", cat.annual_frequency},
              {"climate_label", cat.climate_label},
              {"source_weight", cat.source_weight},
              {"study_center", {cat.study_center.lat, cat.study_center.lon}}};
  if (!cat.hist_annual_max.empty()) header["hist_annual_max"] = cat.hist_annual_max;
  out << header.dump() << '\n';
  for (const auto& s : cat.storms) out << storm_to_json(s).dump() << '\n';
}

double bias_correct_frequency(double ref_hist_freq, double model_hist_freq,
                              double model_future_freq) {
  if (ref_hist_freq <= 0 || model_hist_freq <= 0 || model_future_freq <= 0)
    throw HazError("bias_correct_frequency: frequencies must be positive");
  return model_future_freq * (ref_hist_freq / model_hist_freq);
}

std::vector<double> quantile_map_weights(const std::vector<double>& model_future,
                                         const std::vector<double>& model_hist,
                                         const std::vector<double>& ref_hist,
                                         CatalogDiagnostics* diag) {
  constexpr std::size_t kMinSamples = 30;
  if (model_future.size() < kMinSamples || model_hist.size() < kMinSamples ||
      ref_hist.size() < kMinSamples)
    throw HazError("quantile_map_weights: each sample set needs >= 30 members");

  auto degenerate = [](const std::vector<double>& v) {
    return *std::min_element(v.begin(), v.end()) ==
           *std::max_element(v.begin(), v.end());
  };
  if (degenerate(model_future) || degenerate(model_hist) || degenerate(ref_hist))
    throw HazError("quantile_map_weights: degenerate sample set, mapping undefined");

  const EmpiricalCdf f_mh(model_hist);
  const EmpiricalCdf f_rh(ref_hist);

  const std::size_t n = model_future.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i)
    target[i] = quantile_map_value(f_mh, f_rh, model_future[i]);

  // Density ratio via 20 equal-probability bins of the model-future sample;
  // the outermost bins extend to +-inf so transported mass is never dropped.
  constexpr int kBins = 20;
  std::vector<double> sorted_future(model_future);
  std::sort(sorted_future.begin(), sorted_future.end());
  std::vector<double> edges;  // kBins - 1 interior edges
  for (int b = 1; b < kBins; ++b)
    edges.push_back(quantile_sorted(sorted_future, static_cast<double>(b) / kBins));

  auto bin_of = [&](double v) {
    return static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  };

  std::vector<double> model_mass(kBins, 0.0), target_mass(kBins, 0.0);
  for (double v : model_future) model_mass[bin_of(v)] += 1.0;
  for (double u : target) target_mass[bin_of(u)] += 1.0;

  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t B = bin_of(model_future[i]);
    w[i] = model_mass[B] > 0 ? target_mass[B] / model_mass[B] : 0.0;
  }

  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0) throw HazError("quantile_map_weights: all weights vanished");
  for (auto& x : w) x *= static_cast<double>(n) / total;

  // importance-weight collapse is a data-quality signal, not a hard error
  double sum_sq = 0;
  for (double x : w) sum_sq += x * x;
  const double ess = static_cast<double>(n) * static_cast<double>(n) / sum_sq;
  if (diag && ess < 0.05 * static_cast<double>(n))
    diag->warnings.push_back(
        "quantile_map_weights: effective sample size collapsed to " +
        std::to_string(ess) + " of " + std::to_string(n));
  return w;
}

StormCatalog blend_catalogs(const std::vector<StormCatalog>& corrected,
                            const std::vector<double>& ref_hist_annual_max) {
  if (corrected.empty()) throw HazError("blend_catalogs: no catalogs given");

  constexpr double kEps = 1e-3;
  std::vector<double> sw(corrected.size(), 1.0);
  if (corrected.size() > 1 || !corrected.front().hist_annual_max.empty()) {
    for (std::size_t m = 0; m < corrected.size(); ++m) {
      if (corrected[m].hist_annual_max.empty())
        throw HazError("blend_catalogs: catalog '" + corrected[m].climate_label +
                       "' lacks hist_annual_max samples");
      const double d =
          cramer_von_mises(corrected[m].hist_annual_max, ref_hist_annual_max);
      sw[m] = 1.0 / (kEps + d);
    }
  }
  const double sw_total = std::accumulate(sw.begin(), sw.end(), 0.0);
  for (auto& x : sw) x /= sw_total;

  StormCatalog out;
  out.climate_label = "blended";
  out.source_weight = 1.0;
  out.study_center = corrected.front().study_center;
  double freq = 0;
  bool prefix = false;
  {
    std::set<std::string> ids;
    for (const auto& c : corrected)
      for (const auto& s : c.storms)
        if (!ids.insert(s.id).second) prefix = true;  // collision -> label-prefix all
  }

  for (std::size_t m = 0; m < corrected.size(); ++m) {
    const auto& c = corrected[m];
    freq += sw[m] * c.annual_frequency;
    for (auto s : c.storms) {
      if (prefix) s.id = c.climate_label + "/" + s.id;
      s.weight *= sw[m];
      out.storms.push_back(std::move(s));
    }
  }
  out.annual_frequency = freq;
  finalize_catalog(out);
  return out;
}

EventSequence resample_period(const StormCatalog& cat, int years, std::uint64_t seed) {
  if (years < 1) throw HazError("resample_period: years must be >= 1");

  std::vector<double> cumulative;
  cumulative.reserve(cat.storms.size());
  double acc = 0;
  for (const auto& s : cat.storms) {
    acc += s.weight;
    cumulative.push_back(acc);
  }

  EventSequence seq;
  seq.period_years = years;
  seq.rng_seed = seed;
  RngStream rng(seed);
  for (int y = 0; y < years; ++y) {
    const long n = rng.poisson(cat.annual_frequency);
    std::vector<EventSequence::Event> year_events;
    for (long k = 0; k < n; ++k) {
      const std::size_t idx = rng.weighted_index(cumulative);
      EventSequence::Event e;
      e.year = y;
      e.seasonal_day = cat.storms[idx].seasonal_day;
      e.storm_id = cat.storms[idx].id;
      e.storm_index = idx;
      year_events.push_back(std::move(e));
    }
    std::stable_sort(year_events.begin(), year_events.end(),
                     [](const auto& a, const auto& b) {
                       return a.seasonal_day < b.seasonal_day;
                     });
    for (auto& e : year_events) seq.events.push_back(std::move(e));
  }
  return seq;
}

}  // namespace hazsim
