#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hazsim/damage.hpp"
#include "hazsim/powerflow.hpp"

namespace hazsim {

struct RepairResources {
  int transmission_crews = 2;
  int distribution_crews = 8;
  double mobilization_delay_h = 12.0;
  double jitter_frac = 0.2;  // deterministic +-20% keyed by (seed, component id)
  // mean repair duration per component class, hours
  std::array<double, kNumComponentClasses> repair_hours{96.0, 36.0, 16.0, 10.0, 4.0};

  void validate() const;
};

RepairResources load_resources(const std::string& path);
void save_resources(const RepairResources& r, const std::string& path);

// Completion hour per component, aligned with the DamageState layout.
// Intact components carry 0 (already in service).
struct RepairTimeline {
  std::vector<double> substation_done;
  std::vector<double> line_done;
  std::vector<double> node_done;
  std::vector<double> branch_done;
  std::vector<double> circuit_done;
  double makespan_h = 0;
  std::vector<double> epochs;  // sorted distinct completion times
};

// Class-bound crews working fixed priority queues: transmission substations,
// then transmission lines (descending downstream customers); distribution
// repairs feeding critical facilities, then by descending downstream
// customers, then local circuits.
RepairTimeline schedule_repairs(const DamageState& damage, const PowerNetwork& net,
                                const RepairResources& resources, std::uint64_t seed);

struct OutageTimeSeries {
  double step_h = 3.0;
  std::vector<double> fraction_without_power;  // index k -> hour k * step_h
  std::vector<double> node_restoration_h;      // per global node, 0 = never out
  double full_restoration_h = 0;
  std::vector<std::pair<double, double>> epochs;  // (hour, fraction) breakpoints
};

// Replays the repair timeline: at each completion epoch the restored
// component set grows, power flow is re-solved and service recomputed.
OutageTimeSeries outage_series(const PowerNetwork& net, const DamageState& damage,
                               const RepairTimeline& timeline,
                               const std::vector<double>& bus_demand,
                               CapacityScale scale, double step_h);

}  // namespace hazsim
