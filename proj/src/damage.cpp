#include "hazsim/damage.hpp"

#include <cmath>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"
#include "hazsim/stats.hpp"

namespace hazsim {

namespace {
constexpr const char* kClassNames[kNumComponentClasses] = {
    "transmission_substation", "transmission_line", "distribution_node",
    "distribution_line", "local_circuit"};
}

const char* component_class_name(ComponentClass c) {
  return kClassNames[static_cast<std::size_t>(c)];
}

std::optional<ComponentClass> component_class_from_name(const std::string& name) {
  for (int i = 0; i < kNumComponentClasses; ++i)
    if (name == kClassNames[i]) return static_cast<ComponentClass>(i);
  return std::nullopt;
}

void FragilitySet::validate() const {
  for (int i = 0; i < kNumComponentClasses; ++i) {
    if (classes[static_cast<std::size_t>(i)].median_ms <= 0)
      throw ValidationError(std::string("fragility ") + kClassNames[i] +
                            ": median must be positive");
    if (classes[static_cast<std::size_t>(i)].xi <= 0)
      throw ValidationError(std::string("fragility ") + kClassNames[i] +
                            ": xi must be positive");
  }
}

FragilitySet load_fragility(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j,
               {"transmission_substation", "transmission_line", "distribution_node",
                "distribution_line", "local_circuit"},
               path);
  FragilitySet f;
  for (int i = 0; i < kNumComponentClasses; ++i) {
    if (!j.contains(kClassNames[i]))
      throw ParseError(path + ": missing fragility class " + kClassNames[i]);
    const auto& c = j.at(kClassNames[i]);
    require_keys(c, {"median_ms", "xi", "per_km"}, path + " " + kClassNames[i]);
    auto& p = f.classes[static_cast<std::size_t>(i)];
    p.median_ms = get_required<double>(c, "median_ms", path);
    p.xi = get_required<double>(c, "xi", path);
    p.per_km = get_required<bool>(c, "per_km", path);
  }
  f.validate();
  return f;
}

void save_fragility(const FragilitySet& f, const std::string& path) {
  json j;
  for (int i = 0; i < kNumComponentClasses; ++i) {
    const auto& p = f.classes[static_cast<std::size_t>(i)];
    j[kClassNames[i]] = {{"median_ms", p.median_ms}, {"xi", p.xi}, {"per_km", p.per_km}};
  }
  save_json_file(j, path);
}

double fragility_probability(ComponentClass cls, double gust_ms,
                             double exposed_length_km, const FragilitySet& f) {
  if (gust_ms < 0) throw HazError("fragility_probability: negative gust");
  if (gust_ms == 0) return 0.0;
  const auto& p = f[cls];
  const double point = normal_cdf(std::log(gust_ms / p.median_ms) / p.xi);
  if (!p.per_km) return point;
  if (exposed_length_km < 0)
    throw HazError("fragility_probability: negative exposed length");
  return 1.0 - std::pow(1.0 - point, exposed_length_km);
}

DamageState DamageState::empty_for(const PowerNetwork& net) {
  DamageState d;
  d.substation_failed.assign(net.substations.size(), 0);
  d.line_failed.assign(net.lines.size(), 0);
  d.node_failed.assign(static_cast<std::size_t>(net.idx.n_nodes), 0);
  d.branch_failed.assign(static_cast<std::size_t>(net.idx.n_branches), 0);
  d.circuit_failed.assign(static_cast<std::size_t>(net.idx.n_nodes), 0);
  return d;
}

std::size_t DamageState::failed_count() const {
  std::size_t n = 0;
  for (auto v : substation_failed) n += v;
  for (auto v : line_failed) n += v;
  for (auto v : node_failed) n += v;
  for (auto v : branch_failed) n += v;
  for (auto v : circuit_failed) n += v;
  return n;
}

WindLookup build_wind_lookup(const PowerNetwork& net, const std::vector<LatLon>& grid) {
  if (grid.empty()) throw HazError("build_wind_lookup: empty study grid");
  if (net.substations.empty()) throw HazError("build_wind_lookup: network has no substations");
  auto nearest = [&](LatLon p) {
    int best = 0;
    double best_d = haversine_km(p, grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double d = haversine_km(p, grid[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };

  WindLookup lk;
  lk.substation_pt.reserve(net.substations.size());
  for (const auto& s : net.substations) lk.substation_pt.push_back(nearest(s.loc));

  lk.line_pt_a.reserve(net.lines.size());
  lk.line_pt_b.reserve(net.lines.size());
  auto bus_loc = [&](const std::string& id, LatLon fallback) {
    for (const auto& p : net.plants)
      if (p.id == id) return p.loc;
    for (const auto& s : net.substations)
      if (s.id == id) return s.loc;
    return fallback;  // EXT: use the other endpoint
  };
  for (const auto& l : net.lines) {
    const LatLon a = bus_loc(l.from, bus_loc(l.to, net.substations.front().loc));
    const LatLon b = bus_loc(l.to, a);
    lk.line_pt_a.push_back(nearest(a));
    lk.line_pt_b.push_back(nearest(b));
  }

  lk.node_pt.reserve(static_cast<std::size_t>(net.idx.n_nodes));
  for (int n = 0; n < net.idx.n_nodes; ++n) lk.node_pt.push_back(nearest(net.node(n).loc));
  return lk;
}

namespace {

bool draw_failure(double p, std::uint64_t seed, std::string_view component_id) {
  if (p <= 0) return false;
  RngStream rng(derive_seed(seed, fnv1a64(component_id)));
  return rng.uniform() < p;
}

}  // namespace

DamageState sample_damage(const PowerNetwork& net, const WindFieldMap& wind,
                          const WindLookup& lookup, const FragilitySet& fragility,
                          std::uint64_t seed) {
  fragility.validate();
  DamageState d = DamageState::empty_for(net);
  d.seed = seed;
  const auto& gust = wind.max_gust_ms;

  for (std::size_t s = 0; s < net.substations.size(); ++s) {
    const double g = gust[lookup.substation_pt[s]];
    const double p =
        fragility_probability(ComponentClass::kTransmissionSubstation, g, 0, fragility);
    if (draw_failure(p, seed, net.substations[s].id)) d.substation_failed[s] = 1;
  }

  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (net.lines[l].underground) continue;
    const double g = std::max(gust[lookup.line_pt_a[l]], gust[lookup.line_pt_b[l]]);
    const double p = fragility_probability(ComponentClass::kTransmissionLine, g,
                                           net.lines[l].length_km, fragility);
    if (draw_failure(p, seed, net.lines[l].id)) d.line_failed[l] = 1;
  }

  for (int n = 0; n < net.idx.n_nodes; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double g = gust[lookup.node_pt[un]];
    const auto& nd = net.node(n);
    const double pn =
        fragility_probability(ComponentClass::kDistributionNode, g, 0, fragility);
    if (draw_failure(pn, seed, nd.id)) d.node_failed[un] = 1;
    const double pc =
        fragility_probability(ComponentClass::kLocalCircuit, g, 0, fragility);
    if (draw_failure(pc, seed, nd.id + "#circuit")) d.circuit_failed[un] = 1;
  }

  for (int b = 0; b < net.idx.n_branches; ++b) {
    const auto& br = net.branch(b);
    if (br.underground) continue;
    const int child = net.idx.branch_child[b];
    const double g = gust[lookup.node_pt[static_cast<std::size_t>(child)]];
    const double p = fragility_probability(ComponentClass::kDistributionLine, g,
                                           br.length_km, fragility);
    if (draw_failure(p, seed, br.id)) d.branch_failed[static_cast<std::size_t>(b)] = 1;
  }
  return d;
}

}  // namespace hazsim
