#pragma once

#include <span>
#include <vector>

#include "coco/denoiser.hpp"
#include "coco/rng.hpp"

namespace coco {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;  ///< sample standard deviation / sqrt(N); 0 when N < 2
  long long count = 0;
};

/// Streaming mean/variance accumulator (Welford, long double state).
class McAccumulator {
 public:
  void add(double value);
  double mean() const { return static_cast<double>(mean_); }
  long long count() const { return count_; }
  double variance() const;  ///< unbiased sample variance
  McEstimate estimate() const;

 private:
  long double mean_ = 0.0L;
  long double m2_ = 0.0L;
  long long count_ = 0;
};

/// Standard normal CDF.
double norm_cdf(double z);

/// 1-D two-point configuration for the constraint-tightness study:
/// dx = x1 - x2 >= 0, dgrad = grad f(x1) - grad f(x2), denoiser constant L
/// and oracle noise level sigma.
struct TightnessQuery {
  double dx = 0.0;
  double dgrad = 0.0;
  double lipschitz = 1.0;
  double sigma = 1.0;
};

/// Probability that two noisy gradients are co-coercive:
/// Phi((L dx - dgrad) / (sqrt(2) sigma)) - Phi(-dgrad / (sqrt(2) sigma)).
double p_inactive_theoretical(const TightnessQuery& q);
double p_active_theoretical(const TightnessQuery& q);

/// Fraction of N iid draws (g1, g2) violating the co-coercivity inequality.
McEstimate p_active_empirical(const TightnessQuery& q, long long n, Rng& rng);

struct MseReport {
  std::vector<McEstimate> per_point;  ///< E||theta_k - truth_k||^2
  McEstimate stacked;                 ///< E||theta - truth||^2 over all K blocks
};

/// Monte-Carlo MSE from per-replication estimates against fixed truths.
MseReport mse_estimate(const std::vector<std::vector<Vector>>& estimates,
                       const std::vector<Vector>& truths);

struct BiasReport {
  std::vector<double> norm;  ///< ||mean(theta_k) - truth_k|| per point
  std::vector<double> se;    ///< bootstrap standard error
};

/// Bias norms with nonparametric-bootstrap standard errors.
BiasReport bias_estimate(const std::vector<std::vector<Vector>>& estimates,
                         const std::vector<Vector>& truths, Rng& rng, int resamples = 200);

/// Least-squares slope with the intercept fixed at zero.
double slope_through_origin(std::span<const double> xs, std::span<const double> ys);

}  // namespace coco
