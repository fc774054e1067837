#include "hazsim/risk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <numeric>
#include <thread>

#include "hazsim/errors.hpp"
#include "hazsim/rng.hpp"

namespace hazsim {

namespace {
// salts for per-period / per-event substreams
constexpr std::uint64_t kPeriodSalt = 101;
constexpr std::uint64_t kSequenceSalt = 1;
constexpr std::uint64_t kDamageSalt = 2;
constexpr std::uint64_t kHeatSalt = 3;
constexpr std::uint64_t kRepairSalt = 4;
}  // namespace

void SimulationContext::prepare() {
  if (!network || !catalog || !climatology)
    throw HazError("SimulationContext: missing inputs");
  if (grid.empty()) throw HazError("SimulationContext: empty study grid");
  fragility.validate();
  resources.validate();
  wind.validate();
  wind_lookup = build_wind_lookup(*network, grid);
  bus_demand = network->bus_demand_mw(mw_per_customer);
  if (heat.anomaly_c.empty()) heat.anomaly_c = default_anomaly_table();
  apply_t_bias = climatology->bias_correctable();
  if (apply_t_bias)
    t_bias = monthly_bias_daily_offsets(*climatology->model_hist_monthly_t2m,
                                        *climatology->reference_monthly_t2m);
  else
    t_bias.fill(0.0);
}

namespace {

// unpowered days: day k counts when the node lacks power > 12 of its 24 hours
int unpowered_days(double restoration_h) {
  if (restoration_h <= 12.0) return 0;
  return static_cast<int>(std::ceil((restoration_h - 12.0) / 24.0));
}

int outage_days(double restoration_h) {
  if (restoration_h <= 0) return 0;
  return static_cast<int>(std::ceil(restoration_h / 24.0));
}

double series_value_at(const OutageTimeSeries& s, double hour) {
  double level = s.epochs.empty() ? 0.0 : s.epochs.front().second;
  for (const auto& [t, f] : s.epochs) {
    if (t > hour) break;
    level = f;
  }
  return level;
}

}  // namespace

std::map<std::string, long> attribute_disruptions(const PowerNetwork& net,
                                                  const DamageState& damage,
                                                  const FlowSolution& flow,
                                                  const ServiceState& service) {
  std::map<std::string, long> impact;
  auto touch = [&](const std::string& id) { impact.emplace(id, 0); };
  for (std::size_t s = 0; s < damage.substation_failed.size(); ++s)
    if (damage.substation_failed[s]) touch(net.substations[s].id);
  for (std::size_t l = 0; l < damage.line_failed.size(); ++l)
    if (damage.line_failed[l]) touch(net.lines[l].id);
  for (std::size_t n = 0; n < damage.node_failed.size(); ++n)
    if (damage.node_failed[n]) touch(net.node(static_cast<int>(n)).id);
  for (std::size_t b = 0; b < damage.branch_failed.size(); ++b)
    if (damage.branch_failed[b]) touch(net.branch(static_cast<int>(b)).id);
  for (std::size_t n = 0; n < damage.circuit_failed.size(); ++n)
    if (damage.circuit_failed[n]) touch(net.node(static_cast<int>(n)).id + "#circuit");

  // nearest failed transmission component for substations cut off upstream:
  // breadth-first over the undamaged transmission graph, smallest id on ties
  std::vector<std::vector<std::pair<std::size_t, int>>> adjacency(net.idx.bus_id.size());
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto [a, b] = net.idx.line_bus[l];
    adjacency[static_cast<std::size_t>(a)].push_back({l, b});
    adjacency[static_cast<std::size_t>(b)].push_back({l, a});
  }
  auto nearest_transmission_failure = [&](int start_bus) -> std::string {
    const int sub0 = net.idx.bus_substation[static_cast<std::size_t>(start_bus)];
    if (sub0 >= 0 && damage.substation_failed[static_cast<std::size_t>(sub0)])
      return net.substations[static_cast<std::size_t>(sub0)].id;
    std::vector<char> seen(net.idx.bus_id.size(), 0);
    std::deque<int> frontier{start_bus};
    seen[static_cast<std::size_t>(start_bus)] = 1;
    while (!frontier.empty()) {
      std::vector<std::string> found;
      std::deque<int> next;
      for (int bus : frontier) {
        for (const auto& [l, other] : adjacency[static_cast<std::size_t>(bus)]) {
          if (damage.line_failed[l]) {
            found.push_back(net.lines[l].id);
            continue;
          }
          const int sub = net.idx.bus_substation[static_cast<std::size_t>(other)];
          if (sub >= 0 && damage.substation_failed[static_cast<std::size_t>(sub)]) {
            found.push_back(net.substations[static_cast<std::size_t>(sub)].id);
            continue;
          }
          if (!seen[static_cast<std::size_t>(other)]) {
            seen[static_cast<std::size_t>(other)] = 1;
            next.push_back(other);
          }
        }
      }
      if (!found.empty()) return *std::min_element(found.begin(), found.end());
      frontier = std::move(next);
    }
    return "island:" + net.idx.bus_id[static_cast<std::size_t>(start_bus)];
  };

  // walk each tree once, tracking the nearest failed component above
  std::vector<int> blocker(static_cast<std::size_t>(net.idx.n_nodes), -1);
  // blocker coding: -1 intact path; otherwise index into blocker_ids
  std::vector<std::string> blocker_ids;
  std::vector<int> root_blocker_of_bus(net.idx.bus_id.size(), -2);  // -2 = not computed

  for (int n : net.idx.topo_order) {
    const auto un = static_cast<std::size_t>(n);
    const int parent = net.idx.node_parent[n];
    int blk = -1;
    if (parent >= 0) {
      blk = blocker[static_cast<std::size_t>(parent)];
    } else {
      const auto bus = static_cast<std::size_t>(net.idx.node_bus[n]);
      const int sub = net.idx.bus_substation[bus];
      const bool sub_alive = !damage.substation_failed[static_cast<std::size_t>(sub)];
      const int isl = sub_alive ? flow.partition.bus_island[bus] : -1;
      const bool powered = sub_alive && isl >= 0 && flow.bus_served_mw[bus] > 1e-12;
      if (!powered) {
        auto& cached = root_blocker_of_bus[bus];
        if (cached == -2) {
          blocker_ids.push_back(nearest_transmission_failure(static_cast<int>(bus)));
          cached = static_cast<int>(blocker_ids.size()) - 1;
        }
        blk = cached;
      }
    }
    if (blk < 0 && damage.branch_failed[static_cast<std::size_t>(net.idx.node_parent_branch[n])]) {
      blocker_ids.push_back(net.branch(net.idx.node_parent_branch[n]).id);
      blk = static_cast<int>(blocker_ids.size()) - 1;
    }
    if (blk < 0 && damage.node_failed[un]) {
      blocker_ids.push_back(net.node(n).id);
      blk = static_cast<int>(blocker_ids.size()) - 1;
    }
    blocker[un] = blk;

    const long customers = net.node(n).customers;
    if (customers == 0) continue;
    if (service.node_served[un]) continue;
    // the service drop is the component nearest to the customer
    if (blk < 0 && damage.circuit_failed[un]) {
      impact[net.node(n).id + "#circuit"] += customers;
    } else if (blk >= 0) {
      impact[blocker_ids[static_cast<std::size_t>(blk)]] += customers;
    }
  }
  return impact;
}

PeriodRiskResult simulate_period(const SimulationContext& ctx, int period_index) {
  const auto& net = *ctx.network;
  PeriodRiskResult result;
  result.period_seed = derive_seed(ctx.master_seed, kPeriodSalt,
                                   static_cast<std::uint64_t>(period_index));
  result.node_outage_days.assign(static_cast<std::size_t>(net.idx.n_nodes), 0);
  result.node_compound_days.assign(static_cast<std::size_t>(net.idx.n_nodes), 0);

  const EventSequence seq = resample_period(
      *ctx.catalog, ctx.period_years, derive_seed(result.period_seed, kSequenceSalt));

  for (std::size_t e = 0; e < seq.events.size(); ++e) {
    const auto& ev = seq.events[e];
    const std::uint64_t event_base = derive_seed(result.period_seed, 1000, e);
    const auto& storm = ctx.catalog->storms[ev.storm_index];

    EventOutcome outcome;
    outcome.year = ev.year;
    outcome.seasonal_day = ev.seasonal_day;
    outcome.storm_id = ev.storm_id;

    // heat draw is independent of the damage path so hardening variants
    // sharing seeds see identical weather
    const HeatEventSeries raw = event_heat_series(
        *ctx.climatology, ev.seasonal_day, ctx.heat.window_days,
        derive_seed(event_base, kHeatSalt), ctx.apply_t_bias ? &ctx.t_bias : nullptr);
    const HeatEventSeries heat = tc_composite_adjust(raw, ctx.heat.anomaly_c);
    outcome.heatwave_days = heatwave_duration_days(heat.hi_c, ctx.heat.hi_threshold_c);

    const WindFieldMap wind =
        event_wind_map(storm, ctx.grid, ctx.wind, ctx.wind_time_step_h);
    const DamageState damage = sample_damage(net, wind, ctx.wind_lookup, ctx.fragility,
                                             derive_seed(event_base, kDamageSalt));
    outcome.failed_components = static_cast<int>(damage.failed_count());

    if (damage.any()) {
      const RepairTimeline timeline = schedule_repairs(
          damage, net, ctx.resources, derive_seed(event_base, kRepairSalt));
      const OutageTimeSeries series =
          outage_series(net, damage, timeline, ctx.bus_demand, ctx.capacity,
                        ctx.series_step_h);
      outcome.full_restoration_h = series.full_restoration_h;
      outcome.peak_outage_fraction =
          series.epochs.empty() ? 0.0 : series.epochs.front().second;
      outcome.outage_fraction_5d = series_value_at(series, 120.0);

      // longest heatwave run inside the first K days, precomputed per K
      const int window = ctx.heat.window_days;
      std::vector<int> best_in_prefix(static_cast<std::size_t>(window) + 1, 0);
      {
        int run = 0;
        for (int k = 0; k < window; ++k) {
          run = heat.hi_c[static_cast<std::size_t>(k)] > ctx.heat.hi_threshold_c ? run + 1 : 0;
          best_in_prefix[static_cast<std::size_t>(k + 1)] =
              std::max(best_in_prefix[static_cast<std::size_t>(k)], run);
        }
      }
      for (int n = 0; n < net.idx.n_nodes; ++n) {
        const auto un = static_cast<std::size_t>(n);
        const double r = series.node_restoration_h[un];
        if (r <= 0) continue;
        result.node_outage_days[un] =
            std::max(result.node_outage_days[un], outage_days(r));
        const int k = std::min(unpowered_days(r), window);
        result.node_compound_days[un] = std::max(
            result.node_compound_days[un], best_in_prefix[static_cast<std::size_t>(k)]);
      }

      if (ctx.collect_disruptions) {
        const FlowSolution flow =
            solve_power_flow(net, damage, ctx.bus_demand, ctx.capacity);
        const ServiceState st = served_customers(net, damage, flow);
        for (const auto& [id, customers] : attribute_disruptions(net, damage, flow, st))
          result.disruption_impacts.push_back(static_cast<double>(customers));
      }
    }

    result.events.push_back(std::move(outcome));
  }
  return result;
}

PeriodSummary summarize_period(const SimulationContext& ctx, int headline_days,
                               const PeriodRiskResult& result) {
  const auto& net = *ctx.network;
  PeriodSummary s;
  s.seed = result.period_seed;
  s.n_events = static_cast<int>(result.events.size());
  const auto d_max = static_cast<std::size_t>(ctx.max_duration_days);
  s.outage_exceed.assign(d_max, 0.0);
  s.compound_exceed.assign(d_max, 0.0);
  s.tract_outage.assign(net.idx.tracts.size(), 0.0);
  s.tract_compound.assign(net.idx.tracts.size(), 0.0);

  std::vector<long> tract_customers(net.idx.tracts.size(), 0);
  for (int n = 0; n < net.idx.n_nodes; ++n)
    tract_customers[static_cast<std::size_t>(net.idx.node_tract[n])] +=
        net.node(n).customers;

  // fraction of customers with at least one event exceeding each duration
  const double total = static_cast<double>(net.total_customers());
  for (int n = 0; n < net.idx.n_nodes; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const long c = net.node(n).customers;
    if (c == 0) continue;
    const auto tract = static_cast<std::size_t>(net.idx.node_tract[n]);
    for (int d = 1; d <= ctx.max_duration_days; ++d) {
      if (result.node_outage_days[un] > d)
        s.outage_exceed[static_cast<std::size_t>(d - 1)] += static_cast<double>(c);
      if (result.node_compound_days[un] > d)
        s.compound_exceed[static_cast<std::size_t>(d - 1)] += static_cast<double>(c);
    }
    if (result.node_outage_days[un] > headline_days)
      s.tract_outage[tract] += static_cast<double>(c);
    if (result.node_compound_days[un] > headline_days)
      s.tract_compound[tract] += static_cast<double>(c);
  }
  for (auto& v : s.outage_exceed) v /= total;
  for (auto& v : s.compound_exceed) v /= total;
  for (std::size_t t = 0; t < net.idx.tracts.size(); ++t) {
    if (tract_customers[t] == 0) continue;
    s.tract_outage[t] /= static_cast<double>(tract_customers[t]);
    s.tract_compound[t] /= static_cast<double>(tract_customers[t]);
  }

  for (const auto& ev : result.events) {
    s.max_restoration_days =
        std::max(s.max_restoration_days, ev.full_restoration_h / 24.0);
    s.heatwave_days.push_back(ev.heatwave_days);
  }
  return s;
}

EnsembleResult run_ensemble(const SimulationContext& ctx, int n_periods,
                            int headline_days, int workers) {
  if (n_periods < 1) throw HazError("run_ensemble: need at least one period");
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_periods);

  std::vector<PeriodSummary> summaries(static_cast<std::size_t>(n_periods));
  std::vector<std::vector<double>> impacts(static_cast<std::size_t>(n_periods));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (!failed.load()) {
      const int i = next.fetch_add(1);
      if (i >= n_periods) break;
      try {
        PeriodRiskResult r = simulate_period(ctx, i);
        PeriodSummary s = summarize_period(ctx, headline_days, r);
        s.index = i;
        summaries[static_cast<std::size_t>(i)] = std::move(s);
        impacts[static_cast<std::size_t>(i)] = std::move(r.disruption_impacts);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw HazError("ensemble worker failed: " + error_message);

  EnsembleResult out;
  out.periods = std::move(summaries);
  for (auto& v : impacts)
    out.disruption_impacts.insert(out.disruption_impacts.end(), v.begin(), v.end());
  for (const auto& p : out.periods) out.total_events += p.n_events;
  return out;
}

namespace {

ExceedanceRow make_row(int d, std::vector<double> values) {
  ExceedanceRow row;
  row.d = d;
  row.mean = sample_mean(values);
  row.sigma = std::sqrt(sample_variance(values));
  std::sort(values.begin(), values.end());
  for (double q : kBandQuantiles) row.quantiles.push_back(quantile_sorted(values, q));
  return row;
}

}  // namespace

ExceedanceTable exceedance_stats(const EnsembleResult& ensemble) {
  if (ensemble.periods.empty()) throw HazError("exceedance_stats: empty ensemble");
  const auto d_max = ensemble.periods.front().outage_exceed.size();
  ExceedanceTable table;
  for (std::size_t d = 0; d < d_max; ++d) {
    std::vector<double> o, c;
    o.reserve(ensemble.periods.size());
    c.reserve(ensemble.periods.size());
    for (const auto& p : ensemble.periods) {
      o.push_back(p.outage_exceed[d]);
      c.push_back(p.compound_exceed[d]);
    }
    table.outage.push_back(make_row(static_cast<int>(d) + 1, std::move(o)));
    table.compound.push_back(make_row(static_cast<int>(d) + 1, std::move(c)));
  }
  return table;
}

double exceedance_mean(const EnsembleResult& ensemble, int d, bool compound) {
  if (ensemble.periods.empty()) throw HazError("exceedance_mean: empty ensemble");
  double acc = 0;
  for (const auto& p : ensemble.periods)
    acc += compound ? p.compound_exceed[static_cast<std::size_t>(d - 1)]
                    : p.outage_exceed[static_cast<std::size_t>(d - 1)];
  return acc / static_cast<double>(ensemble.periods.size());
}

std::vector<RelativeRiskRow> heatwave_probability_curve(
    const EnsembleResult& historical, const EnsembleResult& future, double floor,
    int max_days) {
  auto pooled = [](const EnsembleResult& e) {
    std::vector<int> days;
    for (const auto& p : e.periods)
      days.insert(days.end(), p.heatwave_days.begin(), p.heatwave_days.end());
    return days;
  };
  const std::vector<int> hist = pooled(historical);
  const std::vector<int> fut = pooled(future);
  if (hist.empty() || fut.empty())
    throw HazError("heatwave_probability_curve: an ensemble has no events");
  if (floor <= 0) floor = 1.0 / static_cast<double>(hist.size());

  std::vector<RelativeRiskRow> rows;
  for (int d = 1; d <= max_days; ++d) {
    RelativeRiskRow row;
    row.d = d;
    row.p_hist = static_cast<double>(std::count_if(
                     hist.begin(), hist.end(), [&](int x) { return x > d; })) /
                 static_cast<double>(hist.size());
    row.p_future = static_cast<double>(std::count_if(
                       fut.begin(), fut.end(), [&](int x) { return x > d; })) /
                   static_cast<double>(fut.size());
    row.p_hist_floored = std::max(row.p_hist, floor);
    row.ratio = row.p_future / row.p_hist_floored;
    rows.push_back(row);
  }
  return rows;
}

ScalingCurve scaling_curve(std::vector<double> impacts) {
  ScalingCurve curve;
  if (impacts.empty()) return curve;
  std::sort(impacts.begin(), impacts.end());
  curve.n_disruptions = impacts.size();
  curve.total_impact = std::accumulate(impacts.begin(), impacts.end(), 0.0);

  const double n = static_cast<double>(impacts.size());
  // walk distinct levels; suffix counts/sums give P and W
  std::size_t i = 0;
  double suffix_impact = curve.total_impact;
  while (i < impacts.size()) {
    const double x = impacts[i];
    std::size_t j = i;
    double level_sum = 0;
    while (j < impacts.size() && impacts[j] == x) level_sum += impacts[j++];
    suffix_impact -= level_sum;
    curve.x.push_back(x);
    curve.p.push_back(static_cast<double>(impacts.size() - j) / n);
    curve.w.push_back(curve.total_impact > 0 ? suffix_impact / curve.total_impact : 0.0);
    i = j;
  }

  const auto top = static_cast<std::size_t>(
      std::ceil(0.2 * static_cast<double>(impacts.size())));
  double top_sum = 0;
  for (std::size_t k = impacts.size() - top; k < impacts.size(); ++k)
    top_sum += impacts[k];
  curve.top20_share = curve.total_impact > 0 ? top_sum / curve.total_impact : 0.0;
  return curve;
}

std::vector<TractRiskRow> tract_risk_map(const SimulationContext& ctx,
                                         const EnsembleResult& ensemble) {
  const auto& net = *ctx.network;
  std::vector<long> tract_customers(net.idx.tracts.size(), 0);
  for (int n = 0; n < net.idx.n_nodes; ++n)
    tract_customers[static_cast<std::size_t>(net.idx.node_tract[n])] +=
        net.node(n).customers;

  std::vector<TractRiskRow> rows;
  for (std::size_t t = 0; t < net.idx.tracts.size(); ++t) {
    std::vector<double> o, c;
    for (const auto& p : ensemble.periods) {
      o.push_back(p.tract_outage[t]);
      c.push_back(p.tract_compound[t]);
    }
    TractRiskRow row;
    row.tract = net.idx.tracts[t];
    row.customers = tract_customers[t];
    row.outage_mean = sample_mean(o);
    row.outage_sigma = std::sqrt(sample_variance(o));
    row.compound_mean = sample_mean(c);
    row.compound_sigma = std::sqrt(sample_variance(c));
    rows.push_back(std::move(row));
  }
  return rows;
}

LengthRiskResult length_risk_correlation(const SimulationContext& ctx,
                                         const EnsembleResult& ensemble) {
  const auto& net = *ctx.network;
  if (net.idx.tracts.size() < 3)
    throw HazError("length_risk_correlation: need at least 3 tracts");

  LengthRiskResult out;
  std::vector<double> xs, ys;
  const auto rows = tract_risk_map(ctx, ensemble);
  for (const auto& row : rows) {
    const auto summary = harmonic_mean_sector_length(net, row.tract);
    if (summary.sector_count == 0) continue;
    LengthRiskPoint pt;
    pt.tract = row.tract;
    pt.harmonic_mean_km = summary.harmonic_mean_km;
    pt.sector_count = summary.sector_count;
    pt.outage_fraction = row.outage_mean;
    xs.push_back(pt.harmonic_mean_km);
    ys.push_back(pt.outage_fraction);
    out.points.push_back(std::move(pt));
  }
  out.fit = linear_fit(xs, ys);
  return out;
}

}  // namespace hazsim
