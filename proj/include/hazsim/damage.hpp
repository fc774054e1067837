#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hazsim/grid.hpp"
#include "hazsim/windfield.hpp"

namespace hazsim {

enum class ComponentClass {
  kTransmissionSubstation = 0,
  kTransmissionLine = 1,
  kDistributionNode = 2,
  kDistributionLine = 3,
  kLocalCircuit = 4,
};
inline constexpr int kNumComponentClasses = 5;

const char* component_class_name(ComponentClass c);
std::optional<ComponentClass> component_class_from_name(const std::string& name);

struct FragilityParams {
  double median_ms = 60.0;  // gust at 50% failure probability
  double xi = 0.4;          // lognormal dispersion
  bool per_km = false;      // interpret the point probability per km of length
};

struct FragilitySet {
  std::array<FragilityParams, kNumComponentClasses> classes;

  FragilityParams& operator[](ComponentClass c) {
    return classes[static_cast<std::size_t>(c)];
  }
  const FragilityParams& operator[](ComponentClass c) const {
    return classes[static_cast<std::size_t>(c)];
  }
  void validate() const;
};

FragilitySet load_fragility(const std::string& path);
void save_fragility(const FragilitySet& f, const std::string& path);

// Lognormal fragility. Point classes: Phi(ln(gust/median)/xi); per-km classes
// aggregate over the exposed length: 1 - (1 - p_km)^L.
double fragility_probability(ComponentClass cls, double gust_ms,
                             double exposed_length_km, const FragilitySet& f);

struct DamageState {
  std::vector<std::uint8_t> substation_failed;  // per substation ordinal
  std::vector<std::uint8_t> line_failed;        // per transmission line ordinal
  std::vector<std::uint8_t> node_failed;        // per global distribution node
  std::vector<std::uint8_t> branch_failed;      // per global distribution branch
  std::vector<std::uint8_t> circuit_failed;     // per global distribution node
  std::uint64_t seed = 0;

  static DamageState empty_for(const PowerNetwork& net);
  std::size_t failed_count() const;
  bool any() const { return failed_count() > 0; }
};

// Nearest study-grid sample per component, computed once per (network, grid).
struct WindLookup {
  std::vector<int> substation_pt;  // per substation ordinal
  std::vector<int> line_pt_a, line_pt_b;
  std::vector<int> node_pt;  // per global distribution node
};
WindLookup build_wind_lookup(const PowerNetwork& net, const std::vector<LatLon>& grid);

// Independent per-component Bernoulli draws; the uniform for a component is
// keyed by (seed, component id), so identical components see identical draws
// across hardening variants of the same event.
DamageState sample_damage(const PowerNetwork& net, const WindFieldMap& wind,
                          const WindLookup& lookup, const FragilitySet& fragility,
                          std::uint64_t seed);

}  // namespace hazsim
