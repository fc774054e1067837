#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hazsim/catalog.hpp"
#include "hazsim/damage.hpp"
#include "hazsim/grid.hpp"
#include "hazsim/heat.hpp"
#include "hazsim/powerflow.hpp"
#include "hazsim/recovery.hpp"
#include "hazsim/stats.hpp"
#include "hazsim/windfield.hpp"

namespace hazsim {

struct HeatSettings {
  double hi_threshold_c = kHiWarningThresholdC;
  int window_days = 30;
  std::vector<double> anomaly_c;  // composite adjustment, days 0..10
};

// Immutable bundle shared by every period worker of one ensemble.
struct SimulationContext {
  const PowerNetwork* network = nullptr;
  const StormCatalog* catalog = nullptr;
  const HeatClimatology* climatology = nullptr;
  std::vector<LatLon> grid;
  WindLookup wind_lookup;
  FragilitySet fragility;
  RepairResources resources;
  WindParams wind;
  double wind_time_step_h = 1.0;
  double series_step_h = 3.0;
  HeatSettings heat;
  std::array<double, kDaysPerYear> t_bias{};  // zeros when no correction applies
  bool apply_t_bias = false;
  double mw_per_customer = 0.003;
  std::vector<double> bus_demand;  // derived in prepare()
  CapacityScale capacity{1.0};
  int period_years = 20;
  int max_duration_days = 20;
  std::uint64_t master_seed = 0;
  bool collect_disruptions = false;

  void prepare();  // builds lookup/demand/bias from the referenced inputs
};

struct EventOutcome {
  int year = 0;
  int seasonal_day = 1;
  std::string storm_id;
  int failed_components = 0;
  double peak_outage_fraction = 0;
  double outage_fraction_5d = 0;  // series value at hour 120
  double full_restoration_h = 0;
  int heatwave_days = 0;
};

struct PeriodRiskResult {
  std::uint64_t period_seed = 0;
  std::vector<int> node_outage_days;    // per-node max over events
  std::vector<int> node_compound_days;  // per-node max over events
  std::vector<EventOutcome> events;
  std::vector<double> disruption_impacts;  // attributed customers per failure
};

PeriodRiskResult simulate_period(const SimulationContext& ctx, int period_index);

// Per-period reduction kept by the ensemble; node-level arrays are dropped
// here so memory stays flat across large ensembles.
struct PeriodSummary {
  int index = 0;
  std::uint64_t seed = 0;
  int n_events = 0;
  std::vector<double> outage_exceed;    // [d-1], d = 1..max_duration_days
  std::vector<double> compound_exceed;
  std::vector<double> tract_outage, tract_compound;  // at the headline duration
  double max_restoration_days = 0;
  std::vector<int> heatwave_days;  // per event
};

PeriodSummary summarize_period(const SimulationContext& ctx, int headline_days,
                               const PeriodRiskResult& result);

struct EnsembleResult {
  std::vector<PeriodSummary> periods;
  std::vector<double> disruption_impacts;  // pooled over the ensemble, period order
  long total_events = 0;
};

// Periods are independent workers; the reduction is run in period order so
// results are identical for any worker count.
EnsembleResult run_ensemble(const SimulationContext& ctx, int n_periods,
                            int headline_days, int workers);

inline const std::vector<double> kBandQuantiles{0.05, 0.16, 0.25, 0.50,
                                                0.75, 0.84, 0.95};

struct ExceedanceRow {
  int d = 0;
  double mean = 0, sigma = 0;
  std::vector<double> quantiles;  // aligned with kBandQuantiles
};

struct ExceedanceTable {
  std::vector<ExceedanceRow> outage;
  std::vector<ExceedanceRow> compound;
};
ExceedanceTable exceedance_stats(const EnsembleResult& ensemble);
// Expected fraction of customers seeing at least one > d-day event.
double exceedance_mean(const EnsembleResult& ensemble, int d, bool compound);

struct RelativeRiskRow {
  int d = 0;
  double p_future = 0;
  double p_hist = 0;
  double p_hist_floored = 0;
  double ratio = 0;
};
// Post-hurricane heatwave duration probabilities per climate and their
// floored ratio; floor <= 0 selects 1 / (historical event count).
std::vector<RelativeRiskRow> heatwave_probability_curve(
    const EnsembleResult& historical, const EnsembleResult& future, double floor,
    int max_days);

struct ScalingCurve {
  std::vector<double> x;  // distinct impact levels, ascending
  std::vector<double> p;  // fraction of disruptions with impact > x
  std::vector<double> w;  // fraction of customer-interruptions from those
  double top20_share = 0;
  std::size_t n_disruptions = 0;
  double total_impact = 0;
};
ScalingCurve scaling_curve(std::vector<double> impacts);

struct TractRiskRow {
  std::string tract;
  long customers = 0;
  double outage_mean = 0, outage_sigma = 0;
  double compound_mean = 0, compound_sigma = 0;
};
std::vector<TractRiskRow> tract_risk_map(const SimulationContext& ctx,
                                         const EnsembleResult& ensemble);

struct LengthRiskPoint {
  std::string tract;
  double harmonic_mean_km = 0;
  int sector_count = 0;
  double outage_fraction = 0;
};
struct LengthRiskResult {
  std::vector<LengthRiskPoint> points;
  LinearFit fit;
};
LengthRiskResult length_risk_correlation(const SimulationContext& ctx,
                                         const EnsembleResult& ensemble);

// Customer-impact attribution of one event's unserved demand: every unserved
// customer is charged to the nearest failed component on its path toward the
// energized source. Returns (component id -> customers); every failed
// component appears, harmless ones with zero impact.
std::map<std::string, long> attribute_disruptions(const PowerNetwork& net,
                                                  const DamageState& damage,
                                                  const FlowSolution& flow,
                                                  const ServiceState& service);

}  // namespace hazsim
