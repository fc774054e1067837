#include "hazsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hazsim/errors.hpp"

namespace hazsim {

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = sample_mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(n - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted.front();
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double gamma_q(double a, double x) {
  if (a <= 0 || x < 0) throw HazError("gamma_q: domain error");
  if (x == 0) return 1.0;
  const double lng = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x)
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lng);
  }
  // Lentz continued fraction for Q(a, x)
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lng) * h;
}

double chi_square_sf(double x, int dof) {
  if (dof <= 0) throw HazError("chi_square_sf: dof must be positive");
  return gamma_q(0.5 * dof, 0.5 * x);
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) {
  if (samples.empty()) throw HazError("EmpiricalCdf: empty sample");
  std::sort(samples.begin(), samples.end());
  n_ = samples.size();
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    if (!x_.empty() && samples[i] == x_.back()) {
      p_.back() = p;  // ties collapse to the highest plotting position
    } else {
      x_.push_back(samples[i]);
      p_.push_back(p);
    }
  }
}

double EmpiricalCdf::cdf(double x) const {
  if (x <= x_.front()) return p_.front();
  if (x >= x_.back()) return p_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return p_[lo] + t * (p_[hi] - p_[lo]);
}

double EmpiricalCdf::quantile(double p) const {
  if (p <= p_.front()) return x_.front();
  if (p >= p_.back()) return x_.back();
  const auto it = std::upper_bound(p_.begin(), p_.end(), p);
  const std::size_t hi = static_cast<std::size_t>(it - p_.begin());
  const std::size_t lo = hi - 1;
  const double t = (p - p_[lo]) / (p_[hi] - p_[lo]);
  return x_[lo] + t * (x_[hi] - x_[lo]);
}

double quantile_map_value(const EmpiricalCdf& model_hist,
                          const EmpiricalCdf& ref_hist, double v) {
  if (v < model_hist.min()) return v + (ref_hist.min() - model_hist.min());
  if (v > model_hist.max()) return v + (ref_hist.max() - model_hist.max());
  return ref_hist.quantile(model_hist.cdf(v));
}

double ks_distance(std::vector<double> values, std::vector<double> weights,
                   std::vector<double> reference) {
  if (values.empty() || reference.empty())
    throw HazError("ks_distance: empty sample");
  if (weights.empty()) weights.assign(values.size(), 1.0);
  if (weights.size() != values.size())
    throw HazError("ks_distance: weight/value size mismatch");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::sort(reference.begin(), reference.end());

  const double wtot = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (wtot <= 0) throw HazError("ks_distance: nonpositive total weight");
  const double m = static_cast<double>(reference.size());

  double fw = 0, sup = 0;
  std::size_t i = 0, j = 0;
  while (i < order.size() || j < reference.size()) {
    double x;
    if (j >= reference.size() ||
        (i < order.size() && values[order[i]] <= reference[j])) {
      x = values[order[i]];
    } else {
      x = reference[j];
    }
    while (i < order.size() && values[order[i]] <= x) fw += weights[order[i++]];
    while (j < reference.size() && reference[j] <= x) ++j;
    sup = std::max(sup, std::abs(fw / wtot - static_cast<double>(j) / m));
  }
  return sup;
}

double cramer_von_mises(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw HazError("cramer_von_mises: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  auto cdf_at = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
           static_cast<double>(s.size());
  };
  double acc = 0;
  for (double x : pooled) {
    const double d = cdf_at(a, x) - cdf_at(b, x);
    acc += d * d;
  }
  return acc / static_cast<double>(pooled.size());
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw HazError("linear_fit: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  const double mx = sample_mean(xs);
  const double my = sample_mean(ys);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) throw HazError("linear_fit: degenerate x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (xs.size() > 2) {
    double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ssr += r * r;
    }
    const double s2 = ssr / (n - 2.0);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

PoissonGof poisson_gof(const std::vector<long>& counts, double lambda) {
  if (counts.empty() || lambda <= 0)
    throw HazError("poisson_gof: empty counts or nonpositive rate");
  long kmax = 0;
  for (long c : counts) kmax = std::max(kmax, c);

  const double n = static_cast<double>(counts.size());
  std::vector<double> expected;
  double pmf = std::exp(-lambda);
  double tail = 1.0;
  for (long k = 0; k <= kmax; ++k) {
    if (k > 0) pmf *= lambda / static_cast<double>(k);
    expected.push_back(n * pmf);
    tail -= pmf;
  }
  expected.push_back(n * std::max(0.0, tail));  // k > kmax

  std::vector<double> observed(expected.size(), 0.0);
  for (long c : counts) observed[static_cast<std::size_t>(c)] += 1.0;

  // pool the upper tail until each bin expects >= 5
  while (expected.size() > 2 && expected.back() < 5.0) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }

  PoissonGof out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] <= 0) continue;
    const double d = observed[i] - expected[i];
    out.statistic += d * d / expected[i];
  }
  out.dof = static_cast<int>(expected.size()) - 1;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

}  // namespace hazsim
