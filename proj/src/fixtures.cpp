#include "hazsim/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hazsim/damage.hpp"
#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/powerflow.hpp"
#include "hazsim/recovery.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

namespace {

const LatLon kStudyCenter{29.76, -95.37};

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

// ring 0: < 8 km, ring 1: 8..13 km, ring 2: beyond
std::string tract_of(double x_km, double y_km) {
  const double r = std::hypot(x_km, y_km);
  const int ring = r < 8.0 ? 0 : (r < 13.0 ? 1 : 2);
  double ang = std::atan2(y_km, x_km);
  if (ang < 0) ang += 2 * kPi;
  const int quad = std::min(3, static_cast<int>(ang / (kPi / 2)));
  return "r" + std::to_string(ring) + "q" + std::to_string(quad);
}

}  // namespace

PowerNetwork generate_network(std::uint64_t seed, double scale) {
  if (scale <= 0) throw HazError("generate_network: scale must be positive");
  RngStream rng(derive_seed(seed, fnv1a64("network")));
  PowerNetwork net;

  // plants on the periphery
  const double plant_angles[3] = {0.5, 2.6, 4.4};
  for (int p = 0; p < 3; ++p) {
    Plant plant;
    plant.id = "P" + std::to_string(p + 1);
    plant.loc = offset_km(kStudyCenter, 19.0 * std::cos(plant_angles[p]),
                          19.0 * std::sin(plant_angles[p]));
    plant.capacity_mw = 48.0 * scale;
    net.plants.push_back(plant);
  }

  // four urban substations near the core, four rural ones further out
  struct SubSpec {
    double radius_km, angle;
    bool rural;
  };
  const SubSpec specs[8] = {{4.5, 0.8, false},  {5.0, 2.4, false}, {4.2, 3.9, false},
                            {5.4, 5.5, false},  {14.0, 0.0, true}, {13.5, 1.6, true},
                            {14.5, 3.1, true},  {13.8, 4.7, true}};
  std::vector<double> sub_x, sub_y;
  for (int s = 0; s < 8; ++s) {
    const double x = specs[s].radius_km * std::cos(specs[s].angle);
    const double y = specs[s].radius_km * std::sin(specs[s].angle);
    sub_x.push_back(x);
    sub_y.push_back(y);
    net.substations.push_back(Substation{"S" + std::to_string(s + 1),
                                         offset_km(kStudyCenter, x, y)});
  }

  // transmission: substation ring, two cross chords, plant spokes, two ties
  int line_no = 0;
  auto add_line = [&](const std::string& from, const std::string& to, double ax,
                      double ay, double bx, double by) {
    TransmissionLine l;
    l.id = "T" + zero_pad(++line_no, 2);
    l.from = from;
    l.to = to;
    l.length_km = std::max(1.0, std::hypot(ax - bx, ay - by));
    l.reactance = 0.004 + 0.0015 * l.length_km;
    l.limit_mw = 1e9;  // provisional; tightened after the base-case solve
    net.lines.push_back(l);
  };
  const int ring_order[8] = {0, 4, 1, 5, 2, 6, 3, 7};  // alternate inner/outer
  for (int k = 0; k < 8; ++k) {
    const int a = ring_order[k], b = ring_order[(k + 1) % 8];
    add_line(net.substations[a].id, net.substations[b].id, sub_x[a], sub_y[a],
             sub_x[b], sub_y[b]);
  }
  add_line(net.substations[0].id, net.substations[2].id, sub_x[0], sub_y[0], sub_x[2],
           sub_y[2]);
  add_line(net.substations[1].id, net.substations[3].id, sub_x[1], sub_y[1], sub_x[3],
           sub_y[3]);
  const int plant_near[3][2] = {{4, 0}, {5, 2}, {7, 3}};
  for (int p = 0; p < 3; ++p)
    for (int s : plant_near[p]) {
      const double px = 19.0 * std::cos(plant_angles[p]);
      const double py = 19.0 * std::sin(plant_angles[p]);
      add_line(net.plants[p].id, net.substations[s].id, px, py, sub_x[s], sub_y[s]);
    }
  add_line(kExternalBusId, net.substations[4].id, sub_x[4] + 25.0, sub_y[4], sub_x[4],
           sub_y[4]);
  add_line(kExternalBusId, net.substations[6].id, sub_x[6] - 25.0, sub_y[6], sub_x[6],
           sub_y[6]);

  // feeders: a trunk chain out of the substation that ends in a bushy service
  // cluster. rural feeders run long trunks to distant clusters, urban ones are
  // compact, so rural trees dominate total length and sector length.
  const int feeders_per_sub = 12;
  int critical_budget = 8;
  for (int s = 0; s < 8; ++s) {
    const bool rural = specs[s].rural;
    for (int f = 0; f < feeders_per_sub; ++f) {
      DistributionTree tree;
      tree.substation = net.substations[s].id;
      const std::string stem = "S" + std::to_string(s + 1) + "f" + zero_pad(f, 2);
      const int chain_len =
          rural ? 6 + static_cast<int>(rng.uniform_index(3)) : 2;
      const int cluster_n = std::max(
          3, static_cast<int>(std::lround(
                 scale * (rural ? 8.0 : 6.0))) +
                 static_cast<int>(rng.uniform_index(3)) - 1);
      const double chain_step = rural ? 1.05 : 0.45;
      const double cluster_step = rural ? 0.30 : 0.35;
      const double feeder_dir = rng.uniform(0, 2 * kPi);

      std::vector<double> px{sub_x[s]};
      std::vector<double> py{sub_y[s]};
      auto add_node = [&](int n, int parent, double len) {
        const double wobble =
            n <= chain_len ? rng.uniform(-0.35, 0.35) : rng.uniform(-1.4, 1.4);
        px.push_back(px[static_cast<std::size_t>(parent)] +
                     len * std::cos(feeder_dir + wobble));
        py.push_back(py[static_cast<std::size_t>(parent)] +
                     len * std::sin(feeder_dir + wobble));
        DistributionNode node;
        node.id = stem + "n" + zero_pad(n, 2);
        node.loc = offset_km(kStudyCenter, px.back(), py.back());
        node.customers = 24 + static_cast<long>(rng.uniform_index(38));
        node.tract = tract_of(px.back(), py.back());
        tree.nodes.push_back(node);
        DistributionBranch br;
        br.id = stem + "b" + zero_pad(n, 2);
        br.from = parent == 0 ? tree.substation : stem + "n" + zero_pad(parent, 2);
        br.to = node.id;
        br.length_km = len;
        tree.branches.push_back(br);
      };

      for (int n = 1; n <= chain_len; ++n)
        add_node(n, n - 1, chain_step * rng.uniform(0.8, 1.2));
      // service cluster hangs off the chain end (the hub)
      const int hub = chain_len;
      for (int k = 1; k <= cluster_n; ++k) {
        const int n = chain_len + k;
        const int parent =
            k <= 2 ? hub
                   : hub + 1 + static_cast<int>(rng.uniform_index(
                                   static_cast<std::size_t>(k - 1)));
        add_node(n, parent, cluster_step * rng.uniform(0.7, 1.3));
      }
      // one cluster-hub critical facility per substation, first feeder only
      if (f == 0 && critical_budget > 0) {
        tree.nodes[static_cast<std::size_t>(hub)].critical = true;
        --critical_budget;
      }
      net.trees.push_back(std::move(tree));
    }
  }
  net.finalize();

  // tighten line limits around the undamaged base case
  const DamageState none = DamageState::empty_for(net);
  const FlowSolution base = solve_power_flow(net, none, net.bus_demand_mw(0.003), {});
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    net.lines[l].limit_mw =
        std::max(8.0 * scale, 1.5 * std::abs(base.line_flow_mw[l]));
  net.finalize();
  return net;
}

StudyGrid generate_grid(double spacing_km) {
  StudyGrid grid;
  int k = 0;
  for (double y = -20.0; y <= 20.0 + 1e-9; y += spacing_km)
    for (double x = -20.0; x <= 20.0 + 1e-9; x += spacing_km) {
      grid.ids.push_back("g" + zero_pad(k++, 4));
      grid.locations.push_back(offset_km(kStudyCenter, x, y));
    }
  return grid;
}

namespace {

// --- storm synthesis ------------------------------------------------------

struct StormShape {
  double vmax_peak;       // m/s at closest approach
  double approach_km;     // signed offset of the track from the center
  double heading;         // radians, direction of motion
  double translation_ms;  // forward speed
  double r_max_km;
  int seasonal_day;
};

SyntheticStorm make_storm(const std::string& id, const StormShape& s) {
  SyntheticStorm storm;
  storm.id = id;
  storm.seasonal_day = s.seasonal_day;
  storm.weight = 1.0;

  const double dir_x = std::cos(s.heading), dir_y = std::sin(s.heading);
  const double off_x = -dir_y * s.approach_km, off_y = dir_x * s.approach_km;
  const double span_km = 360.0;
  const double speed_kmh = s.translation_ms * 3.6;
  const double duration_h = 2.0 * span_km / speed_kmh;
  const double bearing_deg = 90.0 - rad2deg(s.heading);  // math angle -> compass

  for (double t = 0; t <= duration_h + 1e-9; t += 3.0) {
    const double along = -span_km + speed_kmh * t;
    const double x = off_x + dir_x * along;
    const double y = off_y + dir_y * along;
    TrackPoint pt;
    pt.time_offset_h = t;
    const LatLon pos = offset_km(kStudyCenter, x, y);
    pt.lat = pos.lat;
    pt.lon = pos.lon;
    // intensity holds until closest approach, then decays inland
    const double decay = along <= 0 ? 1.0 : std::exp(-0.018 * along / speed_kmh * 3.6);
    pt.v_max_ms = std::max(16.0, s.vmax_peak * decay);
    pt.r_max_km = s.r_max_km;
    pt.trans_speed_ms = s.translation_ms;
    pt.trans_bearing_deg = bearing_deg;
    storm.track.push_back(pt);
  }
  return storm;
}

double draw_intensity(RngStream& rng, double tail_mean, double shift, double cap) {
  const double v = 22.0 + shift - tail_mean * std::log(1.0 - rng.uniform());
  return std::clamp(v, 16.0, cap);
}

int draw_seasonal_day(RngStream& rng, double mean, double sd) {
  // clamped Gaussian via Box-Muller on our own uniforms
  const double u1 = std::max(1e-12, rng.uniform());
  const double u2 = rng.uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * kPi * u2);
  return static_cast<int>(std::clamp(mean + sd * z, 152.0, 334.0));
}

StormCatalog synth_catalog(std::uint64_t seed, const std::string& label,
                           const std::string& id_prefix, int n_storms,
                           double annual_freq, double tail_mean, double shift,
                           double cap, double seasonal_mean) {
  RngStream rng(seed);
  StormCatalog cat;
  cat.climate_label = label;
  cat.annual_frequency = annual_freq;
  cat.study_center = kStudyCenter;

  int made = 0;
  int serial = 0;
  while (made < n_storms) {
    ++serial;
    StormShape shape;
    shape.vmax_peak = draw_intensity(rng, tail_mean, shift, cap);
    shape.approach_km = rng.uniform() < 0.20 ? rng.uniform(-90.0, 90.0)
                                             : rng.uniform(-280.0, 280.0);
    shape.heading = rng.uniform(1.6, 2.9);  // broadly shoreward, WNW to N
    shape.translation_ms = rng.uniform(3.5, 7.5);
    shape.r_max_km = rng.uniform(28.0, 55.0);
    shape.seasonal_day = draw_seasonal_day(rng, seasonal_mean, 27.0);
    if (shape.vmax_peak < kMinLandfallVmax) continue;  // admission rule
    cat.storms.push_back(make_storm(id_prefix + zero_pad(serial, 4), shape));
    ++made;
  }

  // annual-maximum intensity samples for the same climate, used in blending
  RngStream amax_rng(derive_seed(seed, fnv1a64("annual-max")));
  for (int y = 0; y < 48; ++y) {
    const long k = amax_rng.poisson(annual_freq);
    double best = 0;
    for (long i = 0; i < k; ++i)
      best = std::max(best, draw_intensity(amax_rng, tail_mean, shift, cap));
    if (best > 0) cat.hist_annual_max.push_back(best);
  }
  finalize_catalog(cat);
  return cat;
}

StormCatalog calibration_event(const std::string& id, double vmax, double approach_km,
                               double translation_ms, double r_max_km) {
  StormCatalog cat;
  cat.climate_label = id;
  cat.annual_frequency = 1.0;
  cat.study_center = kStudyCenter;
  StormShape shape;
  shape.vmax_peak = vmax;
  shape.approach_km = approach_km;
  shape.heading = 2.2;
  shape.translation_ms = translation_ms;
  shape.r_max_km = r_max_km;
  shape.seasonal_day = 245;
  cat.storms.push_back(make_storm(id, shape));
  finalize_catalog(cat);
  return cat;
}

// --- climatology synthesis -------------------------------------------------

std::array<double, 12> seasonal_monthly(double base, double amplitude) {
  constexpr int kMonthLen[12] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::array<double, 12> m{};
  double start = 0;
  for (int i = 0; i < 12; ++i) {
    const double center = start + kMonthLen[i] / 2.0;
    m[static_cast<std::size_t>(i)] =
        base + amplitude * std::cos(2 * kPi * (center - 212.0) / 366.0);
    start += kMonthLen[i];
  }
  return m;
}

HeatClimatology synth_climatology(std::uint64_t seed, const std::string& label,
                                  int n_years, double base_c, double amplitude_c,
                                  double model_bias_c, bool with_correction) {
  RngStream rng(seed);
  HeatClimatology clim;
  clim.climate_label = label;

  for (int y = 0; y < n_years; ++y) {
    YearSample s;
    s.t2m_c.resize(kDaysPerYear);
    s.q_kgkg.resize(kDaysPerYear);
    s.p_hpa.resize(kDaysPerYear);
    const double year_shift = 0.7 * (2.0 * rng.uniform() - 1.0);
    double anom = 0, rh_anom = 0;
    for (int d = 0; d < kDaysPerYear; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      const double t0 =
          base_c + amplitude_c * std::cos(2 * kPi * (d + 0.5 - 212.0) / 366.0);
      anom = 0.78 * anom + 1.45 * (2.0 * rng.uniform() - 1.0);
      rh_anom = 0.6 * rh_anom + 4.0 * (2.0 * rng.uniform() - 1.0);
      const double t = t0 + model_bias_c + year_shift + anom;
      const double rh = std::clamp(55.0 + rh_anom, 32.0, 94.0);
      const double p = 1013.0 + 2.5 * (2.0 * rng.uniform() - 1.0);
      s.t2m_c[ud] = t;
      s.p_hpa[ud] = p;
      s.q_kgkg[ud] = specific_humidity_from_rh(t, rh, p);
    }
    clim.years.push_back(std::move(s));
  }

  if (with_correction) {
    clim.reference_monthly_t2m = seasonal_monthly(base_c, amplitude_c);
    clim.model_hist_monthly_t2m =
        seasonal_monthly(base_c + model_bias_c, amplitude_c);
  }
  clim.validate();
  return clim;
}

}  // namespace

FixtureSet generate_fixtures(std::uint64_t seed, double scale) {
  FixtureSet fx;
  fx.network = generate_network(seed, scale);
  fx.grid = generate_grid(2.0);

  const int n_storms = std::max(60, static_cast<int>(std::lround(200 * scale)));

  // reference climate (reanalysis-like)
  fx.catalog_historical =
      synth_catalog(derive_seed(seed, fnv1a64("ref-hist")), "historical-reanalysis",
                    "h", n_storms, 1.5, 2.0, 0.0, 35.0, 245.0);

  // two model projections with opposite historical biases; the projection
  // pipeline corrects frequency and intensity, then blends
  struct ModelSpec {
    const char* name;
    double bias;
    double hist_freq, future_freq;
  };
  const ModelSpec models[2] = {{"gcmA", -2.5, 1.2, 1.9}, {"gcmB", 3.0, 1.95, 2.7}};
  const std::vector<double> ref_intensities = fx.catalog_historical.landfall_intensities();

  std::vector<StormCatalog> corrected;
  for (int m = 0; m < 2; ++m) {
    const auto& spec = models[m];
    StormCatalog hist = synth_catalog(
        derive_seed(seed, fnv1a64(spec.name), 1), std::string(spec.name) + "-hist",
        std::string(1, 'a' + m) + "h", n_storms, spec.hist_freq, 2.0, spec.bias,
        35.0 + spec.bias, 245.0);
    StormCatalog fut = synth_catalog(
        derive_seed(seed, fnv1a64(spec.name), 2), std::string(spec.name) + "-future",
        std::string(1, 'a' + m) + "f", n_storms, spec.future_freq, 3.0,
        spec.bias + 2.0, 44.0 + spec.bias, 238.0);

    fut.annual_frequency =
        bias_correct_frequency(1.5, spec.hist_freq, spec.future_freq);
    const auto weights = quantile_map_weights(
        fut.landfall_intensities(), hist.landfall_intensities(), ref_intensities);
    for (std::size_t i = 0; i < fut.storms.size(); ++i)
      fut.storms[i].weight = weights[i];
    fut.hist_annual_max = hist.hist_annual_max;
    corrected.push_back(std::move(fut));
  }
  fx.catalog_future_blended =
      blend_catalogs(corrected, fx.catalog_historical.hist_annual_max);
  fx.catalog_future_blended.climate_label = "future-blended";

  // calibration events: a strong storm whose eyewall crosses the network and
  // a weak, distant, slow-moving one
  fx.catalog_ike = calibration_event("ike-like", 34.5, 38.0, 6.0, 40.0);
  fx.catalog_harvey = calibration_event("harvey-like", 22.5, 115.0, 3.2, 42.0);

  fx.climatology_historical =
      synth_climatology(derive_seed(seed, fnv1a64("clim-hist")),
                        "historical-reanalysis", 20, 21.7, 11.1, 0.0, false);
  fx.climatology_future =
      synth_climatology(derive_seed(seed, fnv1a64("clim-future")), "future-gcm", 20,
                        21.7 + 2.2, 11.1, 1.0, true);
  return fx;
}

void write_fixture_files(std::uint64_t seed, double scale, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const FixtureSet fx = generate_fixtures(seed, scale);
  const std::string d = out_dir + "/";

  save_network(fx.network, d + "network.json");
  save_grid(fx.grid, d + "grid.json");
  save_catalog(fx.catalog_historical, d + "catalog_historical.jsonl");
  save_catalog(fx.catalog_future_blended, d + "catalog_future.jsonl");
  save_catalog(fx.catalog_ike, d + "event_ike.jsonl");
  save_catalog(fx.catalog_harvey, d + "event_harvey.jsonl");
  save_climatology(fx.climatology_historical, d + "climatology_historical.json");
  save_climatology(fx.climatology_future, d + "climatology_future.json");
  save_anomaly_table(default_anomaly_table(), d + "anomaly_table.json");

  // calibration products: tuned so the bundled events reproduce the intended
  // outage scale; cmd_calibrate refines them against targets.json
  FragilitySet frag;
  frag[ComponentClass::kTransmissionSubstation] = {60.0, 0.40, false};
  frag[ComponentClass::kTransmissionLine] = {110.0, 0.35, true};
  frag[ComponentClass::kDistributionNode] = {82.0, 0.30, false};
  frag[ComponentClass::kDistributionLine] = {45.0, 0.30, true};
  frag[ComponentClass::kLocalCircuit] = {62.0, 0.30, false};
  save_fragility(frag, d + "fragility.json");

  RepairResources res;
  res.transmission_crews = 2;
  res.distribution_crews = 6;
  res.mobilization_delay_h = 12.0;
  res.jitter_frac = 0.2;
  res.repair_hours = {120.0, 36.0, 14.0, 9.0, 4.0};
  save_resources(res, d + "resources.json");

  save_json_file(
      json{{"seeds", 24},
           {"max_evaluations", 80},
           {"targets",
            json::array(
                {json{{"name", "ike"},
                      {"catalog", "event_ike.jsonl"},
                      {"target", 0.63},
                      {"tolerance", 0.10}},
                 json{{"name", "harvey"},
                      {"catalog", "event_harvey.jsonl"},
                      {"target", 0.01},
                      {"tolerance", 0.03}}})}},
      d + "targets.json");

  save_json_file(json{{"network", "network.json"},
                      {"grid", "grid.json"},
                      {"fragility", "fragility.json"},
                      {"resources", "resources.json"},
                      {"anomaly_table", "anomaly_table.json"},
                      {"historical",
                       {{"catalog", "catalog_historical.jsonl"},
                        {"climatology", "climatology_historical.json"}}},
                      {"future",
                       {{"catalog", "catalog_future.jsonl"},
                        {"climatology", "climatology_future.json"}}},
                      {"ensemble_size", 2000},
                      {"period_years", 20},
                      {"seed", 20080913},
                      {"output_dir", "out"}},
                 d + "run_config.json");

  save_json_file(
      json{{"generator_seed", seed},
           {"scale", scale},
           {"network",
            {{"plants", fx.network.plants.size()},
             {"substations", fx.network.substations.size()},
             {"transmission_lines", fx.network.lines.size()},
             {"distribution_nodes", fx.network.idx.n_nodes},
             {"distribution_branches", fx.network.idx.n_branches},
             {"customers", fx.network.total_customers()}}},
           {"storms",
            {{"historical", fx.catalog_historical.storms.size()},
             {"future_blended", fx.catalog_future_blended.storms.size()}}},
           {"files",
            {"network.json", "grid.json", "catalog_historical.jsonl",
             "catalog_future.jsonl", "event_ike.jsonl", "event_harvey.jsonl",
             "climatology_historical.json", "climatology_future.json",
             "anomaly_table.json", "fragility.json", "resources.json",
             "targets.json", "run_config.json"}}},
      d + "manifest.json");
}

}  // namespace hazsim
