#include "coco/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coco {

void McAccumulator::add(double value) {
  ++count_;
  const long double delta = value - mean_;
  mean_ += delta / count_;
  m2_ += delta * (value - mean_);
}

double McAccumulator::variance() const {
  return count_ < 2 ? 0.0 : static_cast<double>(m2_ / (count_ - 1));
}

McEstimate McAccumulator::estimate() const {
  McEstimate e;
  e.mean = mean();
  e.count = count_;
  if (count_ >= 2) e.se = std::sqrt(variance() / count_);
  return e;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double p_inactive_theoretical(const TightnessQuery& q) {
  if (!(q.sigma > 0.0)) throw std::invalid_argument("p_inactive_theoretical: sigma must be > 0");
  const double scale = 1.0 / (std::sqrt(2.0) * q.sigma);
  const double p = norm_cdf((q.lipschitz * q.dx - q.dgrad) * scale) - norm_cdf(-q.dgrad * scale);
  return std::clamp(p, 0.0, 1.0);
}

double p_active_theoretical(const TightnessQuery& q) { return 1.0 - p_inactive_theoretical(q); }

McEstimate p_active_empirical(const TightnessQuery& q, long long n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("p_active_empirical: need N >= 2");
  McAccumulator acc;
  for (long long i = 0; i < n; ++i) {
    const double g1 = q.dgrad + q.sigma * rng.normal();
    const double g2 = q.sigma * rng.normal();
    const double diff = g1 - g2;
    const bool violated = !(diff >= 0.0 && diff <= q.lipschitz * q.dx);
    acc.add(violated ? 1.0 : 0.0);
  }
  return acc.estimate();
}

MseReport mse_estimate(const std::vector<std::vector<Vector>>& estimates,
                       const std::vector<Vector>& truths) {
  if (estimates.empty()) throw std::invalid_argument("mse_estimate: no replications");
  const std::size_t k = truths.size();
  std::vector<McAccumulator> per_point(k);
  McAccumulator stacked;
  for (const auto& replication : estimates) {
    if (replication.size() != k)
      throw std::invalid_argument("mse_estimate: estimate/truth count mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double sq = (replication[j] - truths[j]).squaredNorm();
      per_point[j].add(sq);
      total += sq;
    }
    stacked.add(total);
  }
  MseReport report;
  report.per_point.reserve(k);
  for (const auto& acc : per_point) report.per_point.push_back(acc.estimate());
  report.stacked = stacked.estimate();
  return report;
}

BiasReport bias_estimate(const std::vector<std::vector<Vector>>& estimates,
                         const std::vector<Vector>& truths, Rng& rng, int resamples) {
  const std::size_t n = estimates.size();
  if (n < 2) throw std::invalid_argument("bias_estimate: need at least two replications");
  const std::size_t k = truths.size();
  for (const auto& replication : estimates)
    if (replication.size() != k)
      throw std::invalid_argument("bias_estimate: estimate/truth count mismatch");

  BiasReport report;
  report.norm.resize(k);
  report.se.resize(k);
  std::vector<Vector> mean(k, Vector::Zero(truths.empty() ? 0 : truths[0].size()));
  for (const auto& replication : estimates)
    for (std::size_t j = 0; j < k; ++j) mean[j] += replication[j];
  for (std::size_t j = 0; j < k; ++j) report.norm[j] = (mean[j] / n - truths[j]).norm();

  std::vector<McAccumulator> boot(k);
  std::vector<Vector> resampled(k);
  for (int b = 0; b < resamples; ++b) {
    for (auto& v : resampled) v.setZero(truths[0].size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& replication = estimates[rng.uniform_index(n)];
      for (std::size_t j = 0; j < k; ++j) resampled[j] += replication[j];
    }
    for (std::size_t j = 0; j < k; ++j) boot[j].add((resampled[j] / n - truths[j]).norm());
  }
  for (std::size_t j = 0; j < k; ++j) report.se[j] = std::sqrt(boot[j].variance());
  return report;
}

double slope_through_origin(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("slope_through_origin: length mismatch");
  double xy = 0.0, xx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xy += xs[i] * ys[i];
    xx += xs[i] * xs[i];
  }
  if (xx == 0.0) throw std::invalid_argument("slope_through_origin: all xs are zero");
  return xy / xx;
}

}  // namespace coco
