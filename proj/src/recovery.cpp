#include "hazsim/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

void RepairResources::validate() const {
  if (transmission_crews < 1 || distribution_crews < 1)
    throw ValidationError("resources: crew counts must be >= 1");
  if (mobilization_delay_h < 0)
    throw ValidationError("resources: negative mobilization delay");
  if (jitter_frac < 0 || jitter_frac >= 1)
    throw ValidationError("resources: jitter_frac outside [0, 1)");
  for (double h : repair_hours)
    if (h <= 0) throw ValidationError("resources: repair durations must be positive");
}

RepairResources load_resources(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j,
               {"transmission_crews", "distribution_crews", "mobilization_delay_h",
                "jitter_frac", "repair_hours"},
               path);
  RepairResources r;
  r.transmission_crews = get_required<int>(j, "transmission_crews", path);
  r.distribution_crews = get_required<int>(j, "distribution_crews", path);
  r.mobilization_delay_h = get_required<double>(j, "mobilization_delay_h", path);
  r.jitter_frac = get_or<double>(j, "jitter_frac", 0.2, path);
  const auto& h = j.at("repair_hours");
  for (int c = 0; c < kNumComponentClasses; ++c) {
    const char* name = component_class_name(static_cast<ComponentClass>(c));
    r.repair_hours[static_cast<std::size_t>(c)] =
        get_required<double>(h, name, path + " repair_hours");
  }
  r.validate();
  return r;
}

void save_resources(const RepairResources& r, const std::string& path) {
  json hours;
  for (int c = 0; c < kNumComponentClasses; ++c)
    hours[component_class_name(static_cast<ComponentClass>(c))] =
        r.repair_hours[static_cast<std::size_t>(c)];
  save_json_file(json{{"transmission_crews", r.transmission_crews},
                      {"distribution_crews", r.distribution_crews},
                      {"mobilization_delay_h", r.mobilization_delay_h},
                      {"jitter_frac", r.jitter_frac},
                      {"repair_hours", hours}},
                 path);
}

namespace {

struct Job {
  ComponentClass cls;
  std::size_t index;       // into the matching DamageState vector
  int group = 0;           // queue tier, lower first
  long customers = 0;      // priority within tier, higher first
  std::uint64_t id_hash = 0;
  std::string id;
};

double jitter_factor(const RepairResources& res, std::uint64_t seed,
                     std::string_view id) {
  if (res.jitter_frac == 0) return 1.0;
  RngStream rng(derive_seed(seed, fnv1a64(id), 0x9e37));
  return 1.0 + res.jitter_frac * (2.0 * rng.uniform() - 1.0);
}

// earliest-free crew; ties resolved by crew index
void run_queue(std::vector<Job>& jobs, int crews, const RepairResources& res,
               std::uint64_t seed, RepairTimeline& tl) {
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    if (a.group != b.group) return a.group < b.group;
    if (a.customers != b.customers) return a.customers > b.customers;
    return a.id < b.id;
  });

  using Slot = std::pair<double, int>;  // (free time, crew)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free;
  for (int c = 0; c < crews; ++c) free.emplace(res.mobilization_delay_h, c);

  for (const auto& job : jobs) {
    auto [t, crew] = free.top();
    free.pop();
    const double dur = res.repair_hours[static_cast<std::size_t>(job.cls)] *
                       jitter_factor(res, seed, job.id);
    const double done = t + dur;
    free.emplace(done, crew);
    switch (job.cls) {
      case ComponentClass::kTransmissionSubstation:
        tl.substation_done[job.index] = done;
        break;
      case ComponentClass::kTransmissionLine:
        tl.line_done[job.index] = done;
        break;
      case ComponentClass::kDistributionNode:
        tl.node_done[job.index] = done;
        break;
      case ComponentClass::kDistributionLine:
        tl.branch_done[job.index] = done;
        break;
      case ComponentClass::kLocalCircuit:
        tl.circuit_done[job.index] = done;
        break;
    }
    tl.makespan_h = std::max(tl.makespan_h, done);
    tl.epochs.push_back(done);
  }
}

long line_downstream_customers(const PowerNetwork& net, std::size_t line) {
  long total = 0;
  for (int side = 0; side < 2; ++side) {
    const int bus = net.idx.line_bus[line][side];
    if (bus >= 0) total += net.idx.substation_customers[static_cast<std::size_t>(bus)];
  }
  return total;
}

}  // namespace

RepairTimeline schedule_repairs(const DamageState& damage, const PowerNetwork& net,
                                const RepairResources& resources, std::uint64_t seed) {
  resources.validate();
  RepairTimeline tl;
  tl.substation_done.assign(damage.substation_failed.size(), 0.0);
  tl.line_done.assign(damage.line_failed.size(), 0.0);
  tl.node_done.assign(damage.node_failed.size(), 0.0);
  tl.branch_done.assign(damage.branch_failed.size(), 0.0);
  tl.circuit_done.assign(damage.circuit_failed.size(), 0.0);

  std::vector<Job> transmission, distribution;
  for (std::size_t s = 0; s < damage.substation_failed.size(); ++s) {
    if (!damage.substation_failed[s]) continue;
    const auto& id = net.substations[s].id;
    transmission.push_back(Job{ComponentClass::kTransmissionSubstation, s, 0,
                               net.idx.substation_customers[static_cast<std::size_t>(
                                   net.idx.bus_of.at(id))],
                               fnv1a64(id), id});
  }
  for (std::size_t l = 0; l < damage.line_failed.size(); ++l) {
    if (!damage.line_failed[l]) continue;
    transmission.push_back(Job{ComponentClass::kTransmissionLine, l, 1,
                               line_downstream_customers(net, l),
                               fnv1a64(net.lines[l].id), net.lines[l].id});
  }

  // failed distribution nodes repair like the branch feeding them: both cut
  // the same subtree, so they share the priority key
  for (std::size_t b = 0; b < damage.branch_failed.size(); ++b) {
    if (!damage.branch_failed[b]) continue;
    const int child = net.idx.branch_child[static_cast<int>(b)];
    const bool critical = net.idx.subtree_critical[static_cast<std::size_t>(child)] != 0;
    distribution.push_back(Job{ComponentClass::kDistributionLine, b, critical ? 0 : 1,
                               net.idx.subtree_customers[static_cast<std::size_t>(child)],
                               fnv1a64(net.branch(static_cast<int>(b)).id),
                               net.branch(static_cast<int>(b)).id});
  }
  for (std::size_t n = 0; n < damage.node_failed.size(); ++n) {
    if (!damage.node_failed[n]) continue;
    const bool critical = net.idx.subtree_critical[n] != 0;
    distribution.push_back(Job{ComponentClass::kDistributionNode, n, critical ? 0 : 1,
                               net.idx.subtree_customers[n],
                               fnv1a64(net.node(static_cast<int>(n)).id),
                               net.node(static_cast<int>(n)).id});
  }
  for (std::size_t n = 0; n < damage.circuit_failed.size(); ++n) {
    if (!damage.circuit_failed[n]) continue;
    distribution.push_back(Job{ComponentClass::kLocalCircuit, n, 2,
                               net.node(static_cast<int>(n)).customers,
                               fnv1a64(net.node(static_cast<int>(n)).id),
                               net.node(static_cast<int>(n)).id});
  }

  run_queue(transmission, resources.transmission_crews, resources, seed, tl);
  run_queue(distribution, resources.distribution_crews, resources, seed, tl);

  std::sort(tl.epochs.begin(), tl.epochs.end());
  tl.epochs.erase(std::unique(tl.epochs.begin(), tl.epochs.end()), tl.epochs.end());
  return tl;
}

OutageTimeSeries outage_series(const PowerNetwork& net, const DamageState& damage,
                               const RepairTimeline& timeline,
                               const std::vector<double>& bus_demand,
                               CapacityScale scale, double step_h) {
  if (step_h <= 0) throw HazError("outage_series: step must be positive");

  OutageTimeSeries out;
  out.step_h = step_h;
  out.node_restoration_h.assign(static_cast<std::size_t>(net.idx.n_nodes), 0.0);

  const double total = static_cast<double>(net.total_customers());
  DamageState current = damage;
  std::vector<char> restored(static_cast<std::size_t>(net.idx.n_nodes), 0);

  auto evaluate = [&](double t) {
    const FlowSolution flow = solve_power_flow(net, current, bus_demand, scale);
    const ServiceState st = served_customers(net, current, flow);
    for (int n = 0; n < net.idx.n_nodes; ++n) {
      const auto un = static_cast<std::size_t>(n);
      if (st.node_served[un] && !restored[un]) {
        restored[un] = 1;
        out.node_restoration_h[un] = t;
        if (t > 0) out.full_restoration_h = std::max(out.full_restoration_h, t);
      }
    }
    return total > 0 ? 1.0 - static_cast<double>(st.served_customers) / total : 0.0;
  };

  double frac = evaluate(0.0);
  out.epochs.emplace_back(0.0, frac);

  auto clear_repaired = [&](double t) {
    auto sweep = [&](const std::vector<double>& done, std::vector<std::uint8_t>& failed) {
      for (std::size_t i = 0; i < failed.size(); ++i)
        if (failed[i] && done[i] <= t) failed[i] = 0;
    };
    sweep(timeline.substation_done, current.substation_failed);
    sweep(timeline.line_done, current.line_failed);
    sweep(timeline.node_done, current.node_failed);
    sweep(timeline.branch_done, current.branch_failed);
    sweep(timeline.circuit_done, current.circuit_failed);
  };

  for (double t : timeline.epochs) {
    clear_repaired(t);
    const double f = evaluate(t);
    if (f > frac + 1e-12)
      throw HazError("outage_series: restoration fraction increased (non-monotone)");
    frac = f;
    out.epochs.emplace_back(t, f);
  }
  if (current.any() || frac > 0)
    throw HazError("outage_series: restoration did not terminate");

  // sample breakpoints onto the fixed grid
  const auto steps =
      static_cast<std::size_t>(std::ceil(out.full_restoration_h / step_h)) + 1;
  out.fraction_without_power.assign(steps, 0.0);
  std::size_t e = 0;
  double level = out.epochs.front().second;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * step_h;
    while (e + 1 < out.epochs.size() && out.epochs[e + 1].first <= t) {
      ++e;
      level = out.epochs[e].second;
    }
    out.fraction_without_power[k] = level;
  }
  return out;
}

}  // namespace hazsim
