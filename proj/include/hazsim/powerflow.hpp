#pragma once

#include <vector>

#include "hazsim/damage.hpp"
#include "hazsim/grid.hpp"

namespace hazsim {

struct CapacityScale {
  double multiplier = 1.0;
};

struct IslandPartition {
  std::vector<int> bus_island;       // -1 for dead buses (failed substations)
  int n_islands = 0;
  std::vector<std::uint8_t> has_external;  // per island
};

// Connected components of the transmission graph after removing failed
// substations and lines. Islands holding a boundary tie are externally fed.
IslandPartition island_partition(const PowerNetwork& net, const DamageState& damage);

struct FlowSolution {
  IslandPartition partition;
  std::vector<double> line_flow_mw;   // 0 for dead lines
  std::vector<std::uint8_t> line_live;
  std::vector<double> bus_demand_mw;
  std::vector<double> bus_served_mw;      // post-shedding
  std::vector<double> bus_generation_mw;  // dispatched; external import on EXT
  std::vector<double> island_served_fraction;
  int shed_iterations = 0;
};

// DC power flow per island with uniform proportional load shedding until no
// line exceeds its limit. Served demand and dispatched generation balance
// exactly per island.
FlowSolution solve_power_flow(const PowerNetwork& net, const DamageState& damage,
                              const std::vector<double>& bus_demand,
                              CapacityScale scale);

struct ServiceState {
  std::vector<std::uint8_t> node_served;  // per global distribution node
  long served_customers = 0;
  long total_customers = 0;

  double unserved_fraction() const {
    return total_customers == 0
               ? 0.0
               : 1.0 - static_cast<double>(served_customers) /
                           static_cast<double>(total_customers);
  }
};

// A customer has power iff its substation sits in an island with served
// supply, the root-to-node path is intact, and its service drop is intact.
ServiceState served_customers(const PowerNetwork& net, const DamageState& damage,
                              const FlowSolution& flow);

}  // namespace hazsim
