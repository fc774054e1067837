#include "hazsim/harden.hpp"

#include <algorithm>
#include <numeric>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

namespace {

// Greedy fill over shuffled candidates: whole components are taken while they
// fit; the first that does not fit is included only if at least half of it
// fits, then selection stops.
template <typename LengthOf, typename IdOf>
HardeningPlan fill_plan(const std::string& strategy, double rate, std::uint64_t seed,
                        std::vector<std::size_t> order, LengthOf length_of, IdOf id_of,
                        double protectable) {
  if (rate < 0 || rate > 1) throw HazError("hardening rate outside [0, 1]");
  HardeningPlan plan;
  plan.strategy = strategy;
  plan.rate = rate;
  plan.seed = seed;
  plan.protectable_length_km = protectable;
  const double budget = rate * protectable;

  for (std::size_t k : order) {
    const double len = length_of(k);
    const double remaining = budget - plan.selected_length_km;
    if (remaining <= 0) break;
    if (len <= remaining + 1e-12) {
      plan.components.push_back(id_of(k));
      plan.selected_length_km += len;
      continue;
    }
    if (remaining >= 0.5 * len) {
      plan.components.push_back(id_of(k));
      plan.selected_length_km += len;
    }
    break;
  }
  return plan;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

HardeningPlan random_transmission_plan(const PowerNetwork& net, double rate,
                                       std::uint64_t seed) {
  std::vector<std::size_t> overhead;
  double protectable = 0;
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (net.lines[l].underground) continue;
    overhead.push_back(l);
    protectable += net.lines[l].length_km;
  }
  auto order = shuffled_indices(overhead.size(), derive_seed(seed, fnv1a64("transmission")));
  std::vector<std::size_t> candidates;
  for (std::size_t i : order) candidates.push_back(overhead[i]);
  return fill_plan(
      "random_transmission", rate, seed, candidates,
      [&](std::size_t l) { return net.lines[l].length_km; },
      [&](std::size_t l) { return net.lines[l].id; }, protectable);
}

HardeningPlan random_distribution_plan(const PowerNetwork& net, double rate,
                                       std::uint64_t seed) {
  std::vector<std::size_t> overhead;
  double protectable = 0;
  for (int b = 0; b < net.idx.n_branches; ++b) {
    if (net.branch(b).underground) continue;
    overhead.push_back(static_cast<std::size_t>(b));
    protectable += net.branch(b).length_km;
  }
  auto order = shuffled_indices(overhead.size(), derive_seed(seed, fnv1a64("distribution")));
  std::vector<std::size_t> candidates;
  for (std::size_t i : order) candidates.push_back(overhead[i]);
  return fill_plan(
      "random_distribution", rate, seed, candidates,
      [&](std::size_t b) { return net.branch(static_cast<int>(b)).length_km; },
      [&](std::size_t b) { return net.branch(static_cast<int>(b)).id; }, protectable);
}

HardeningPlan greedy_distribution_plan(const PowerNetwork& net, double rate) {
  if (rate < 0 || rate > 1) throw HazError("hardening rate outside [0, 1]");
  HardeningPlan plan;
  plan.strategy = "greedy_distribution";
  plan.rate = rate;

  const auto sectors = sector_decomposition(net);
  std::vector<char> protected_branch(static_cast<std::size_t>(net.idx.n_branches), 0);
  for (int b = 0; b < net.idx.n_branches; ++b)
    if (net.branch(b).underground) protected_branch[static_cast<std::size_t>(b)] = 1;

  double protectable = 0;
  std::vector<double> tree_overhead(net.trees.size(), 0.0);
  for (int b = 0; b < net.idx.n_branches; ++b) {
    if (protected_branch[static_cast<std::size_t>(b)]) continue;
    const double len = net.branch(b).length_km;
    protectable += len;
    tree_overhead[static_cast<std::size_t>(
        net.idx.tree_of_node[net.idx.branch_child[b]])] += len;
  }
  plan.protectable_length_km = protectable;
  const double budget = rate * protectable;
  if (budget <= 0 || protectable <= 0) return plan;

  // sector index per branch, for the frontier test
  std::vector<int> sector_of_branch(static_cast<std::size_t>(net.idx.n_branches), -1);
  for (std::size_t s = 0; s < sectors.size(); ++s)
    for (int b : sectors[s].branches)
      sector_of_branch[static_cast<std::size_t>(b)] = static_cast<int>(s);

  auto sector_is_frontier = [&](const Sector& sec) {
    // every branch above the sector's top must already be protected
    const int top_child = net.idx.branch_child[sec.top_branch];
    int up = net.idx.node_parent[top_child];
    while (up >= 0) {
      const int pb = net.idx.node_parent_branch[up];
      if (!protected_branch[static_cast<std::size_t>(pb)]) return false;
      up = net.idx.node_parent[up];
    }
    return true;
  };

  while (plan.selected_length_km < budget) {
    // tree with the greatest remaining overhead length
    int best_tree = -1;
    for (std::size_t t = 0; t < net.trees.size(); ++t)
      if (tree_overhead[t] > 1e-12 &&
          (best_tree < 0 || tree_overhead[t] > tree_overhead[static_cast<std::size_t>(best_tree)]))
        best_tree = static_cast<int>(t);
    if (best_tree < 0) break;

    // root-most unprotected sector of that tree; ties resolved by the
    // customer load served through the sector, then by sector order
    int pick = -1;
    long pick_customers = -1;
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      const auto& sec = sectors[s];
      if (sec.tree != best_tree) continue;
      bool any_overhead = false;
      for (int b : sec.branches)
        if (!protected_branch[static_cast<std::size_t>(b)]) {
          any_overhead = true;
          break;
        }
      if (!any_overhead || !sector_is_frontier(sec)) continue;
      const long customers = net.idx.subtree_customers[net.idx.branch_child[sec.top_branch]];
      if (customers > pick_customers) {
        pick = static_cast<int>(s);
        pick_customers = customers;
      }
    }
    if (pick < 0) break;  // nothing reachable from the root remains overhead

    const auto& sec = sectors[static_cast<std::size_t>(pick)];
    double sector_len = 0;
    for (int b : sec.branches)
      if (!protected_branch[static_cast<std::size_t>(b)])
        sector_len += net.branch(b).length_km;

    const double remaining = budget - plan.selected_length_km;
    if (sector_len > remaining + 1e-12 && remaining < 0.5 * sector_len) break;

    for (int b : sec.branches) {
      if (protected_branch[static_cast<std::size_t>(b)]) continue;
      protected_branch[static_cast<std::size_t>(b)] = 1;
      plan.components.push_back(net.branch(b).id);
    }
    plan.selected_length_km += sector_len;
    tree_overhead[static_cast<std::size_t>(best_tree)] -= sector_len;
    if (sector_len > remaining + 1e-12) break;  // overshoot absorbed, stop
  }
  return plan;
}

PowerNetwork apply_plan(const PowerNetwork& net, const HardeningPlan& plan) {
  PowerNetwork out = net;
  for (const auto& id : plan.components) {
    bool found = false;
    for (auto& l : out.lines)
      if (l.id == id) {
        l.underground = true;
        found = true;
        break;
      }
    if (!found) {
      for (int b = 0; b < out.idx.n_branches && !found; ++b)
        if (out.branch(b).id == id) {
          out.branch_mutable(b).underground = true;
          found = true;
        }
    }
    if (!found)
      throw ValidationError("hardening plan references unknown component " + id);
  }
  out.finalize();
  return out;
}

void save_plan(const HardeningPlan& plan, const std::string& path) {
  save_json_file(json{{"strategy", plan.strategy},
                      {"rate", plan.rate},
                      {"seed", plan.seed},
                      {"selected_length_km", plan.selected_length_km},
                      {"protectable_length_km", plan.protectable_length_km},
                      {"components", plan.components}},
                 path);
}

HardeningPlan load_plan(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j,
               {"strategy", "rate", "seed", "selected_length_km",
                "protectable_length_km", "components"},
               path);
  HardeningPlan plan;
  plan.strategy = get_required<std::string>(j, "strategy", path);
  plan.rate = get_required<double>(j, "rate", path);
  plan.seed = get_required<std::uint64_t>(j, "seed", path);
  plan.selected_length_km = get_or<double>(j, "selected_length_km", 0.0, path);
  plan.protectable_length_km = get_or<double>(j, "protectable_length_km", 0.0, path);
  plan.components = get_required<std::vector<std::string>>(j, "components", path);
  return plan;
}

std::vector<StrategyRatePoint> evaluate_strategies(
    const PowerNetwork& net, const SimulationContext& base,
    const std::vector<std::string>& strategies, const std::vector<double>& rates,
    int n_periods, int headline_days, int workers) {
  if (!std::is_sorted(rates.begin(), rates.end()))
    throw HazError("evaluate_strategies: rates must be sorted");

  std::vector<StrategyRatePoint> table;
  for (const auto& strategy : strategies) {
    for (double rate : rates) {
      HardeningPlan plan;
      if (strategy == "greedy_distribution")
        plan = greedy_distribution_plan(net, rate);
      else if (strategy == "random_distribution")
        plan = random_distribution_plan(net, rate, base.master_seed);
      else if (strategy == "random_transmission")
        plan = random_transmission_plan(net, rate, base.master_seed);
      else
        throw ConfigError("unknown hardening strategy: " + strategy);

      const PowerNetwork hardened = apply_plan(net, plan);
      SimulationContext ctx = base;
      ctx.network = &hardened;
      ctx.prepare();
      const EnsembleResult ens = run_ensemble(ctx, n_periods, headline_days, workers);

      StrategyRatePoint pt;
      pt.strategy = strategy;
      pt.rate = rate;
      std::vector<double> comp, out;
      for (const auto& p : ens.periods) {
        comp.push_back(p.compound_exceed[static_cast<std::size_t>(headline_days - 1)]);
        out.push_back(p.outage_exceed[static_cast<std::size_t>(headline_days - 1)]);
      }
      pt.compound_mean = sample_mean(comp);
      pt.compound_sigma = std::sqrt(sample_variance(comp));
      pt.outage_mean = sample_mean(out);
      pt.outage_sigma = std::sqrt(sample_variance(out));
      table.push_back(std::move(pt));
    }
  }
  return table;
}

}  // namespace hazsim
