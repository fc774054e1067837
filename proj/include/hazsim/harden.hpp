#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hazsim/grid.hpp"
#include "hazsim/risk.hpp"

namespace hazsim {

struct HardeningPlan {
  std::string strategy;
  double rate = 0;  // protected length / protectable length
  std::uint64_t seed = 0;
  std::vector<std::string> components;  // transmission line or branch ids
  double selected_length_km = 0;
  double protectable_length_km = 0;
};

HardeningPlan random_transmission_plan(const PowerNetwork& net, double rate,
                                       std::uint64_t seed);
HardeningPlan random_distribution_plan(const PowerNetwork& net, double rate,
                                       std::uint64_t seed);

// Deterministic: repeatedly pick the tree with the largest remaining overhead
// length and bury its root-most unprotected sector, until the length budget
// runs out.
HardeningPlan greedy_distribution_plan(const PowerNetwork& net, double rate);

// Copy of the network with the plan's components flagged underground.
PowerNetwork apply_plan(const PowerNetwork& net, const HardeningPlan& plan);

void save_plan(const HardeningPlan& plan, const std::string& path);
HardeningPlan load_plan(const std::string& path);

struct StrategyRatePoint {
  std::string strategy;
  double rate = 0;
  double compound_mean = 0;
  double compound_sigma = 0;
  double outage_mean = 0;
  double outage_sigma = 0;
};

// Shared-seed evaluation: every (strategy, rate) cell reruns the same event
// draws, so differences reflect the plans rather than sampling noise.
std::vector<StrategyRatePoint> evaluate_strategies(
    const PowerNetwork& net, const SimulationContext& base,
    const std::vector<std::string>& strategies, const std::vector<double>& rates,
    int n_periods, int headline_days, int workers);

}  // namespace hazsim
