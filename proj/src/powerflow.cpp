#include "hazsim/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "hazsim/errors.hpp"

namespace hazsim {

namespace {

constexpr double kLimitTol = 1e-9;       // relative slack on limit checks
constexpr double kBalanceTol = 1e-6;     // relative island balance tolerance

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

bool bus_alive(const PowerNetwork& net, const DamageState& dmg, int bus) {
  const int sub = net.idx.bus_substation[bus];
  return sub < 0 || !dmg.substation_failed[static_cast<std::size_t>(sub)];
}

}  // namespace

IslandPartition island_partition(const PowerNetwork& net, const DamageState& damage) {
  const std::size_t nb = net.idx.bus_id.size();
  UnionFind uf(nb);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (damage.line_failed[l]) continue;
    const auto [a, b] = net.idx.line_bus[l];
    if (!bus_alive(net, damage, a) || !bus_alive(net, damage, b)) continue;
    uf.unite(a, b);
  }

  IslandPartition part;
  part.bus_island.assign(nb, -1);
  std::vector<int> root_island(nb, -1);
  for (std::size_t b = 0; b < nb; ++b) {
    if (!bus_alive(net, damage, static_cast<int>(b))) continue;
    const int root = uf.find(static_cast<int>(b));
    if (root_island[static_cast<std::size_t>(root)] < 0)
      root_island[static_cast<std::size_t>(root)] = part.n_islands++;
    part.bus_island[b] = root_island[static_cast<std::size_t>(root)];
  }
  part.has_external.assign(static_cast<std::size_t>(part.n_islands), 0);
  if (net.idx.external_bus >= 0) {
    const int isl = part.bus_island[static_cast<std::size_t>(net.idx.external_bus)];
    if (isl >= 0) part.has_external[static_cast<std::size_t>(isl)] = 1;
  }
  return part;
}

namespace {

struct IslandBuses {
  std::vector<int> buses;          // global bus indices
  std::vector<int> local_of;      // global -> local or -1
  std::vector<std::size_t> lines;  // live lines fully inside the island
};

// One DC solve at served-demand scale s; returns the worst |flow|/limit ratio.
// Dispatch: in-island generation up to capacity (proportional), any external
// tie supplying the remainder as slack.
double solve_at_scale(const PowerNetwork& net, const IslandBuses& isl,
                      const std::vector<double>& demand, double capacity_total,
                      double scale_mult, bool has_external, int slack_local,
                      double s, std::vector<double>& flow_out,
                      std::vector<double>& served_out, std::vector<double>& gen_out) {
  const std::size_t m = isl.buses.size();
  std::vector<double> inj(m, 0.0);

  double served_total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = demand[static_cast<std::size_t>(isl.buses[i])] * s;
    served_out[i] = d;
    inj[i] -= d;
    served_total += d;
  }
  const double in_island_gen = std::min(served_total, capacity_total);
  for (std::size_t i = 0; i < m; ++i) {
    const double cap =
        net.idx.bus_capacity_mw[static_cast<std::size_t>(isl.buses[i])] * scale_mult;
    const double g = capacity_total > 0 ? cap * (in_island_gen / capacity_total) : 0.0;
    gen_out[i] = g;
    inj[i] += g;
  }
  if (has_external) {
    const double import = served_total - in_island_gen;
    gen_out[static_cast<std::size_t>(slack_local)] += import;
    inj[static_cast<std::size_t>(slack_local)] += import;
  }

  if (m == 1 || isl.lines.empty()) {
    for (std::size_t l : isl.lines) flow_out[l] = 0.0;
    return 0.0;
  }

  // reduced B matrix (slack row/column removed)
  const auto n = static_cast<Eigen::Index>(m - 1);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  auto reduced = [&](int local) {
    return local < slack_local ? local : local - 1;
  };
  for (std::size_t l : isl.lines) {
    const auto [ga, gb] = net.idx.line_bus[l];
    const int a = isl.local_of[static_cast<std::size_t>(ga)];
    const int b = isl.local_of[static_cast<std::size_t>(gb)];
    const double w = 1.0 / net.lines[l].reactance;
    if (a != slack_local) B(reduced(a), reduced(a)) += w;
    if (b != slack_local) B(reduced(b), reduced(b)) += w;
    if (a != slack_local && b != slack_local) {
      B(reduced(a), reduced(b)) -= w;
      B(reduced(b), reduced(a)) -= w;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (static_cast<int>(i) != slack_local) p(reduced(static_cast<int>(i))) = inj[i];

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
  const Eigen::VectorXd theta_r = ldlt.solve(p);
  const double resid = (B * theta_r - p).norm();
  if (!theta_r.allFinite() || resid > 1e-6 * (1.0 + p.norm()))
    throw HazError("solve_power_flow: singular island system (partitioning bug)");

  std::vector<double> theta(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (static_cast<int>(i) != slack_local)
      theta[i] = theta_r(reduced(static_cast<int>(i)));

  double worst = 0.0;
  for (std::size_t l : isl.lines) {
    const auto [ga, gb] = net.idx.line_bus[l];
    const int a = isl.local_of[static_cast<std::size_t>(ga)];
    const int b = isl.local_of[static_cast<std::size_t>(gb)];
    const double f = (theta[static_cast<std::size_t>(a)] - theta[static_cast<std::size_t>(b)]) /
                     net.lines[l].reactance;
    flow_out[l] = f;
    worst = std::max(worst, std::abs(f) / net.lines[l].limit_mw);
  }
  return worst;
}

}  // namespace

FlowSolution solve_power_flow(const PowerNetwork& net, const DamageState& damage,
                              const std::vector<double>& bus_demand,
                              CapacityScale scale) {
  if (scale.multiplier <= 0)
    throw HazError("solve_power_flow: capacity multiplier must be positive");
  if (bus_demand.size() != net.idx.bus_id.size())
    throw HazError("solve_power_flow: demand vector size mismatch");

  FlowSolution sol;
  sol.partition = island_partition(net, damage);
  sol.line_flow_mw.assign(net.lines.size(), 0.0);
  sol.line_live.assign(net.lines.size(), 0);
  sol.bus_demand_mw = bus_demand;
  sol.bus_served_mw.assign(bus_demand.size(), 0.0);
  sol.bus_generation_mw.assign(bus_demand.size(), 0.0);
  sol.island_served_fraction.assign(static_cast<std::size_t>(sol.partition.n_islands), 0.0);

  // group buses and live lines per island
  std::vector<IslandBuses> islands(static_cast<std::size_t>(sol.partition.n_islands));
  for (auto& isl : islands) isl.local_of.assign(net.idx.bus_id.size(), -1);
  for (std::size_t b = 0; b < net.idx.bus_id.size(); ++b) {
    const int k = sol.partition.bus_island[b];
    if (k < 0) continue;
    islands[static_cast<std::size_t>(k)].local_of[b] =
        static_cast<int>(islands[static_cast<std::size_t>(k)].buses.size());
    islands[static_cast<std::size_t>(k)].buses.push_back(static_cast<int>(b));
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (damage.line_failed[l]) continue;
    const auto [a, b] = net.idx.line_bus[l];
    const int ka = sol.partition.bus_island[static_cast<std::size_t>(a)];
    const int kb = sol.partition.bus_island[static_cast<std::size_t>(b)];
    if (ka < 0 || ka != kb) continue;
    sol.line_live[l] = 1;
    islands[static_cast<std::size_t>(ka)].lines.push_back(l);
  }

  for (std::size_t k = 0; k < islands.size(); ++k) {
    const auto& isl = islands[k];
    const bool has_external = sol.partition.has_external[k] != 0;

    double capacity_total = 0, demand_total = 0;
    int slack_local = -1;
    double best_cap = -1;
    for (std::size_t i = 0; i < isl.buses.size(); ++i) {
      const auto gb = static_cast<std::size_t>(isl.buses[i]);
      const double cap = net.idx.bus_capacity_mw[gb] * scale.multiplier;
      capacity_total += cap;
      demand_total += bus_demand[gb];
      if (has_external) {
        if (isl.buses[i] == net.idx.external_bus) slack_local = static_cast<int>(i);
      } else if (cap > best_cap ||
                 (cap == best_cap && slack_local >= 0 &&
                  net.idx.bus_id[gb] <
                      net.idx.bus_id[static_cast<std::size_t>(isl.buses[static_cast<std::size_t>(slack_local)])])) {
        if (cap > 0) {
          best_cap = cap;
          slack_local = static_cast<int>(i);
        }
      }
    }

    // no source at all: everything in the island is shed
    if (!has_external && capacity_total <= 0) {
      sol.island_served_fraction[k] = demand_total > 0 ? 0.0 : 1.0;
      for (std::size_t l : isl.lines) sol.line_flow_mw[l] = 0.0;
      continue;
    }
    if (demand_total <= 0) {
      sol.island_served_fraction[k] = 1.0;
      for (std::size_t l : isl.lines) sol.line_flow_mw[l] = 0.0;
      continue;
    }

    std::vector<double> flow(net.lines.size(), 0.0);
    std::vector<double> served(isl.buses.size(), 0.0), gen(isl.buses.size(), 0.0);

    double s = has_external ? 1.0 : std::min(1.0, capacity_total / demand_total);
    double worst = 0;
    bool feasible = false;
    // scaling served demand scales flows linearly except at the dispatch kink,
    // so the binding-ratio update lands exactly on the limit in the common case
    for (int iter = 0; iter < 50; ++iter) {
      ++sol.shed_iterations;
      worst = solve_at_scale(net, isl, bus_demand, capacity_total, scale.multiplier,
                             has_external, slack_local, s, flow, served, gen);
      if (worst <= 1.0 + kLimitTol) {
        feasible = true;
        break;
      }
      s /= worst;
    }
    if (!feasible) {
      double lo = 0.0, hi = s;
      for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        worst = solve_at_scale(net, isl, bus_demand, capacity_total, scale.multiplier,
                               has_external, slack_local, mid, flow, served, gen);
        ++sol.shed_iterations;
        if (worst <= 1.0 + kLimitTol)
          lo = mid;
        else
          hi = mid;
      }
      s = lo * (1.0 - 1e-9);
      worst = solve_at_scale(net, isl, bus_demand, capacity_total, scale.multiplier,
                             has_external, slack_local, s, flow, served, gen);
      if (worst > 1.0 + kLimitTol)
        throw HazError("solve_power_flow: shedding failed to converge");
    }

    double served_total = 0, gen_total = 0;
    for (std::size_t i = 0; i < isl.buses.size(); ++i) {
      const auto gb = static_cast<std::size_t>(isl.buses[i]);
      sol.bus_served_mw[gb] = served[i];
      sol.bus_generation_mw[gb] = gen[i];
      served_total += served[i];
      gen_total += gen[i];
    }
    for (std::size_t l : isl.lines) sol.line_flow_mw[l] = flow[l];
    sol.island_served_fraction[k] = demand_total > 0 ? served_total / demand_total : 1.0;

    if (std::abs(gen_total - served_total) > kBalanceTol * std::max(1.0, served_total))
      throw HazError("solve_power_flow: island balance violated");
  }
  return sol;
}

ServiceState served_customers(const PowerNetwork& net, const DamageState& damage,
                              const FlowSolution& flow) {
  ServiceState st;
  st.node_served.assign(static_cast<std::size_t>(net.idx.n_nodes), 0);
  st.total_customers = net.total_customers();

  std::vector<char> path_ok(static_cast<std::size_t>(net.idx.n_nodes), 0);
  for (int n : net.idx.topo_order) {
    const auto un = static_cast<std::size_t>(n);
    bool ok;
    const int parent = net.idx.node_parent[n];
    if (parent < 0) {
      const auto bus = static_cast<std::size_t>(net.idx.node_bus[n]);
      const int sub = net.idx.bus_substation[bus];
      const bool sub_alive = !damage.substation_failed[static_cast<std::size_t>(sub)];
      bool powered = false;
      if (sub_alive) {
        const int isl = flow.partition.bus_island[bus];
        powered = isl >= 0 && flow.bus_demand_mw[bus] > 0 &&
                  flow.bus_served_mw[bus] > 1e-12;
        if (isl >= 0 && flow.bus_demand_mw[bus] <= 0)
          powered = flow.island_served_fraction[static_cast<std::size_t>(isl)] > 1e-12 ||
                    flow.partition.has_external[static_cast<std::size_t>(isl)];
      }
      ok = powered;
    } else {
      ok = path_ok[static_cast<std::size_t>(parent)] != 0;
    }
    ok = ok && !damage.branch_failed[static_cast<std::size_t>(net.idx.node_parent_branch[n])] &&
         !damage.node_failed[un];
    path_ok[un] = ok ? 1 : 0;
    if (ok && !damage.circuit_failed[un]) {
      st.node_served[un] = 1;
      st.served_customers += net.node(n).customers;
    }
  }
  return st;
}

}  // namespace hazsim
