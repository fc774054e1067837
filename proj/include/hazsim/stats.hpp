#pragma once

#include <span>
#include <vector>

namespace hazsim {

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased

// Type-7 quantile (linear interpolation of order statistics); input sorted.
double quantile_sorted(const std::vector<double>& sorted, double q);

double normal_cdf(double z);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Survival function of the chi-square distribution.
double chi_square_sf(double x, int dof);

// Continuous piecewise-linear empirical CDF on Hazen plotting positions.
// cdf() and quantile() are exact inverses on the sample range, which keeps
// quantile transport an identity map when two samples coincide.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  double cdf(double x) const;
  double quantile(double p) const;
  double min() const { return x_.front(); }
  double max() const { return x_.back(); }
  std::size_t size() const { return n_; }

 private:
  std::vector<double> x_;  // distinct sorted values
  std::vector<double> p_;  // plotting position of the last tied rank
  std::size_t n_ = 0;
};

// v mapped through F_model and the reference quantile function; values beyond
// the model sample range are shifted by the corresponding endpoint delta.
double quantile_map_value(const EmpiricalCdf& model_hist,
                          const EmpiricalCdf& ref_hist, double v);

// sup |F_w - G| between a weighted sample CDF and an unweighted reference.
double ks_distance(std::vector<double> values, std::vector<double> weights,
                   std::vector<double> reference);

// Mean squared CDF gap over the pooled sample; symmetric, in [0, 1).
double cramer_von_mises(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double intercept_se = 0;
};
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

struct PoissonGof {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};
// Chi-square goodness of fit of annual counts against Poisson(lambda); tail
// bins pooled until every expected count is at least 5.
PoissonGof poisson_gof(const std::vector<long>& counts, double lambda);

}  // namespace hazsim
