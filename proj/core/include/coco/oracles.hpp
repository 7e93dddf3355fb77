#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>

#include "coco/rng.hpp"

namespace coco {

using Vector = Eigen::VectorXd;

/// f(x) = 1/2 x^T A x with symmetric PSD Hessian A; minimizer at the origin.
class QuadraticObjective {
 public:
  /// Diagonal Hessian with the given eigenvalues.
  static QuadraticObjective from_eigenvalues(const Vector& eigenvalues);
  /// Same spectrum under a random orthogonal change of basis.
  static QuadraticObjective from_eigenvalues_rotated(const Vector& eigenvalues, Rng& rng);
  static QuadraticObjective from_matrix(const Eigen::MatrixXd& hessian);
  /// Eigenvalues linearly spaced over [lo, hi].
  static QuadraticObjective linspaced(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(hessian_.rows()); }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  double lipschitz_real() const { return eigenvalues_.maxCoeff(); }
  Vector minimizer() const { return Vector::Zero(dim()); }
  const Eigen::MatrixXd& hessian() const { return hessian_; }

 private:
  Eigen::MatrixXd hessian_;
  Vector eigenvalues_;
};

/// Finite-sum logistic regression with per-example Tikhonov term:
/// l_i(x) = log(1 + exp(-y_i a_i^T x)) + lambda/2 ||x||^2, labels in {-1,+1}.
class LogisticObjective {
 public:
  LogisticObjective() = default;
  LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXi labels, double lambda);

  int dim() const { return static_cast<int>(features_.cols()); }
  int size() const { return static_cast<int>(features_.rows()); }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXi& labels() const { return labels_; }

  double example_value(int i, const Vector& x) const;
  Vector example_gradient(int i, const Vector& x) const;
  double value(const Vector& x) const;     ///< mean of example values
  Vector gradient(const Vector& x) const;  ///< mean of example gradients

 private:
  Eigen::MatrixXd features_;  // n x d, rows a_i
  Eigen::VectorXi labels_;    // entries in {-1,+1}
  double lambda_ = 0.0;
};

/// Isotropic Gaussian oracle noise, Sigma = sigma^2 I.
struct NoiseModel {
  double sigma = 0.0;
};

struct OracleSample {
  Vector x;
  Vector g;
};

/// g = true_grad + w, w ~ N(0, sigma^2 I); consumes exactly dim Gaussian
/// draws from the stream (also when sigma is zero).
OracleSample noisy_query(const Vector& x, const Vector& true_grad, const NoiseModel& noise,
                         Rng& rng);

double lipschitz_estimate(const QuadraticObjective& obj);
/// Upper bound on every per-example gradient Lipschitz constant:
/// max_i ||a_i||^2 / 4 + lambda.
double lipschitz_estimate(const LogisticObjective& obj);

/// libsvm text format: "label idx:val idx:val ...", 1-based strictly
/// ascending indices; labels "0"/"-1" map to -1, positive labels to +1;
/// blank lines and '#' comments are skipped. Throws DataError naming the
/// offending line.
LogisticObjective parse_libsvm(std::istream& in, double lambda = 0.0);
LogisticObjective parse_libsvm(const std::string& text, double lambda = 0.0);
LogisticObjective parse_libsvm_file(const std::string& path, double lambda = 0.0);

/// Dense serialization (every coordinate written); parse(serialize(x)) == x.
std::string serialize_libsvm(const LogisticObjective& data);

/// Minimizer via deterministic accelerated full-gradient descent to
/// ||grad|| <= tol. Throws DataError if the budget is exhausted first.
Vector logistic_minimizer(const LogisticObjective& obj, double tol = 1e-10,
                          long max_iterations = 500000);

/// As above, memoized in `<dataset_path>.xstar` keyed by dataset hash and
/// lambda; silently recomputes when the cache is stale or unwritable.
Vector logistic_minimizer_cached(const LogisticObjective& obj, const std::string& dataset_path);

/// An objective paired with its stochastic first-order oracle. Quadratics add
/// Gaussian noise to the exact gradient; logistic objectives sample one
/// example per query (no noise layered on top).
class GradientOracle {
 public:
  GradientOracle(QuadraticObjective obj, NoiseModel noise);
  GradientOracle(LogisticObjective obj, Vector minimizer);

  int dim() const;
  Vector true_gradient(const Vector& x) const;
  /// One oracle call.
  Vector sample_gradient(const Vector& x, Rng& rng) const;
  double lipschitz() const;
  const Vector& minimizer() const { return minimizer_; }

  bool is_quadratic() const { return quadratic_.has_value(); }
  const QuadraticObjective& quadratic() const { return *quadratic_; }
  const LogisticObjective& logistic() const { return *logistic_; }

 private:
  std::optional<QuadraticObjective> quadratic_;
  std::optional<LogisticObjective> logistic_;
  NoiseModel noise_;
  Vector minimizer_;
};

}  // namespace coco
