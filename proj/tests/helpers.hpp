#pragma once

// Test-only oracles: brute-force minimizers, dense operators and finite
// differences, kept independent of the implementation paths they check.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>

#include "coco/denoiser.hpp"
#include "coco/rng.hpp"

namespace coco::test {

/// Dense pairwise-difference operator on k blocks of dimension d, rows in
/// lexicographic pair order.
inline Eigen::MatrixXd dense_difference_operator(int k, int d) {
  const int pairs = k * (k - 1) / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(pairs * d, k * d);
  int row = 0;
  for (int m = 0; m < k; ++m) {
    for (int l = m + 1; l < k; ++l) {
      a.block(row * d, m * d, d, d) = Eigen::MatrixXd::Identity(d, d);
      a.block(row * d, l * d, d, d) = -Eigen::MatrixXd::Identity(d, d);
      ++row;
    }
  }
  return a;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_iteration(const Eigen::MatrixXd& m, int iterations = 20000,
                              double tol = 1e-14) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  v += 0.01 * Eigen::VectorXd::LinSpaced(m.rows(), 0.0, 1.0);  // break symmetry
  v.normalize();
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Eigen::VectorXd w = m * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (i > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

/// Brute-force prox of mu * (r|u| - u c) for one 1-D dual block.
inline double grid_prox_1d(double s, double mu, double c, double r, double lo, double hi,
                           int points) {
  double best_u = lo, best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double u = lo + (hi - lo) * i / (points - 1);
    const double value = 0.5 * (u - s) * (u - s) + mu * (r * std::abs(u) - u * c);
    if (value < best_value) {
      best_value = value;
      best_u = u;
    }
  }
  return best_u;
}

/// Brute-force 1-D two-point denoiser: minimizes the squared error over a
/// feasible grid of (theta1, theta2).
inline std::pair<double, double> grid_coco2_1d(double x1, double x2, double g1, double g2,
                                               double lipschitz, double lo, double hi,
                                               int points) {
  double best1 = g1, best2 = g2, best_value = std::numeric_limits<double>::infinity();
  const double pitch = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double t1 = lo + pitch * i;
    for (int j = 0; j < points; ++j) {
      const double t2 = lo + pitch * j;
      const double dt = t1 - t2;
      if (dt * dt > lipschitz * dt * (x1 - x2) + 1e-12) continue;
      const double value = (g1 - t1) * (g1 - t1) + (g2 - t2) * (g2 - t2);
      if (value < best_value) {
        best_value = value;
        best1 = t1;
        best2 = t2;
      }
    }
  }
  return {best1, best2};
}

/// Central finite differences.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double above = f(probe);
    probe[i] = x[i] - h;
    const double below = f(probe);
    probe[i] = x[i];
    g[i] = (above - below) / (2.0 * h);
  }
  return g;
}

inline Vector random_vector(Rng& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

inline QuerySet random_query_set(Rng& rng, int k, int d, double point_scale, double grad_scale,
                                 double lipschitz) {
  QuerySet q;
  q.lipschitz = lipschitz;
  for (int i = 0; i < k; ++i) {
    q.points.push_back(random_vector(rng, d, point_scale));
    q.gradients.push_back(random_vector(rng, d, grad_scale));
  }
  return q;
}

inline Vector mean_of(const std::vector<Vector>& blocks) {
  Vector m = Vector::Zero(blocks.at(0).size());
  for (const auto& b : blocks) m += b;
  return m / static_cast<double>(blocks.size());
}

}  // namespace coco::test
