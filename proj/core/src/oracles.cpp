#include "coco/oracles.hpp"

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "coco/errors.hpp"
#include "coco/hash.hpp"

namespace coco {

QuadraticObjective QuadraticObjective::from_eigenvalues(const Vector& eigenvalues) {
  if (eigenvalues.size() < 1)
    throw std::invalid_argument("QuadraticObjective: empty eigenvalue list");
  if (eigenvalues.minCoeff() < 0.0)
    throw std::invalid_argument("QuadraticObjective: negative eigenvalue");
  QuadraticObjective obj;
  obj.hessian_ = eigenvalues.asDiagonal();
  obj.eigenvalues_ = eigenvalues;
  return obj;
}

QuadraticObjective QuadraticObjective::from_eigenvalues_rotated(const Vector& eigenvalues,
                                                                Rng& rng) {
  const int d = static_cast<int>(eigenvalues.size());
  Eigen::MatrixXd gauss(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) gauss(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  QuadraticObjective obj = from_eigenvalues(eigenvalues);
  obj.hessian_ = q * eigenvalues.asDiagonal() * q.transpose();
  obj.hessian_ = 0.5 * (obj.hessian_ + obj.hessian_.transpose()).eval();
  return obj;
}

QuadraticObjective QuadraticObjective::from_matrix(const Eigen::MatrixXd& hessian) {
  if (hessian.rows() != hessian.cols())
    throw std::invalid_argument("QuadraticObjective: Hessian must be square");
  if (!hessian.isApprox(hessian.transpose(), 1e-12))
    throw std::invalid_argument("QuadraticObjective: Hessian must be symmetric");
  QuadraticObjective obj;
  obj.hessian_ = hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian, Eigen::EigenvaluesOnly);
  obj.eigenvalues_ = es.eigenvalues();
  if (obj.eigenvalues_.minCoeff() < -1e-12 * std::max(1.0, obj.eigenvalues_.maxCoeff()))
    throw std::invalid_argument("QuadraticObjective: Hessian must be PSD");
  return obj;
}

QuadraticObjective QuadraticObjective::linspaced(int dim, double lo, double hi) {
  return from_eigenvalues(Vector::LinSpaced(dim, lo, hi));
}

double QuadraticObjective::value(const Vector& x) const {
  if (x.size() != hessian_.rows())
    throw std::invalid_argument("QuadraticObjective::value: dimension mismatch");
  return 0.5 * x.dot(hessian_ * x);
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  if (x.size() != hessian_.rows())
    throw std::invalid_argument("QuadraticObjective::gradient: dimension mismatch");
  return hessian_ * x;
}

LogisticObjective::LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXi labels,
                                     double lambda)
    : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda) {
  if (features_.rows() != labels_.size())
    throw std::invalid_argument("LogisticObjective: feature/label count mismatch");
  if (lambda_ < 0.0) throw std::invalid_argument("LogisticObjective: negative lambda");
  for (Eigen::Index i = 0; i < labels_.size(); ++i)
    if (labels_[i] != 1 && labels_[i] != -1)
      throw std::invalid_argument("LogisticObjective: labels must be +-1");
}

namespace {

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

double LogisticObjective::example_value(int i, const Vector& x) const {
  if (i < 0 || i >= size()) throw std::out_of_range("LogisticObjective: example index");
  const double margin = labels_[i] * features_.row(i).dot(x);
  return log1pexp(-margin) + 0.5 * lambda_ * x.squaredNorm();
}

Vector LogisticObjective::example_gradient(int i, const Vector& x) const {
  if (i < 0 || i >= size()) throw std::out_of_range("LogisticObjective: example index");
  const double y = labels_[i];
  const double margin = y * features_.row(i).dot(x);
  return (-y * sigmoid(-margin)) * features_.row(i).transpose() + lambda_ * x;
}

double LogisticObjective::value(const Vector& x) const {
  double total = 0.0;
  for (int i = 0; i < size(); ++i) {
    const double margin = labels_[i] * features_.row(i).dot(x);
    total += log1pexp(-margin);
  }
  return total / size() + 0.5 * lambda_ * x.squaredNorm();
}

Vector LogisticObjective::gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (int i = 0; i < size(); ++i) {
    const double y = labels_[i];
    const double margin = y * features_.row(i).dot(x);
    g += (-y * sigmoid(-margin)) * features_.row(i).transpose();
  }
  return g / size() + lambda_ * x;
}

OracleSample noisy_query(const Vector& x, const Vector& true_grad, const NoiseModel& noise,
                         Rng& rng) {
  if (noise.sigma < 0.0) throw std::invalid_argument("noisy_query: negative sigma");
  OracleSample sample;
  sample.x = x;
  sample.g = true_grad;
  for (Eigen::Index i = 0; i < sample.g.size(); ++i) sample.g[i] += noise.sigma * rng.normal();
  return sample;
}

double lipschitz_estimate(const QuadraticObjective& obj) { return obj.lipschitz_real(); }

double lipschitz_estimate(const LogisticObjective& obj) {
  double max_sq = 0.0;
  for (int i = 0; i < obj.size(); ++i)
    max_sq = std::max(max_sq, obj.features().row(i).squaredNorm());
  return 0.25 * max_sq + obj.lambda();
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw DataError("libsvm parse error at line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& token, int line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects an explicit plus
  const auto res = std::from_chars(begin, end, value);
  if (begin == end || res.ec != std::errc() || res.ptr != end)
    parse_fail(line, "non-numeric field '" + token + "'");
  return value;
}

}  // namespace

LogisticObjective parse_libsvm(std::istream& in, double lambda) {
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<int> labels;
  int max_index = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok) || tok[0] == '#') continue;  // blank or comment

    const double label_value = parse_number(tok, line_no);
    labels.push_back(label_value > 0.0 ? 1 : -1);
    rows.emplace_back();
    int prev_index = 0;
    while (tokens >> tok) {
      if (tok[0] == '#') break;
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(line_no, "expected idx:val, got '" + tok + "'");
      const double index_value = parse_number(tok.substr(0, colon), line_no);
      const int index = static_cast<int>(index_value);
      if (index_value != index || index < 1) parse_fail(line_no, "bad feature index '" + tok + "'");
      if (index <= prev_index) parse_fail(line_no, "non-ascending feature indices");
      const double value = parse_number(tok.substr(colon + 1), line_no);
      rows.back().emplace_back(index, value);
      prev_index = index;
      max_index = std::max(max_index, index);
    }
  }
  if (rows.empty()) throw DataError("libsvm parse error: no examples");

  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), max_index);
  Eigen::VectorXi label_vec(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    label_vec[static_cast<int>(i)] = labels[i];
    for (const auto& [index, value] : rows[i]) features(static_cast<int>(i), index - 1) = value;
  }
  return LogisticObjective(std::move(features), std::move(label_vec), lambda);
}

LogisticObjective parse_libsvm(const std::string& text, double lambda) {
  std::istringstream in(text);
  return parse_libsvm(in, lambda);
}

LogisticObjective parse_libsvm_file(const std::string& path, double lambda) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return parse_libsvm(in, lambda);
}

std::string serialize_libsvm(const LogisticObjective& data) {
  std::string out;
  char buf[64];
  for (int i = 0; i < data.size(); ++i) {
    out += data.labels()[i] > 0 ? "+1" : "-1";
    for (int j = 0; j < data.dim(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), data.features()(i, j));
      out += ' ';
      out += std::to_string(j + 1);
      out += ':';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

Vector logistic_minimizer(const LogisticObjective& obj, double tol, long max_iterations) {
  // Nesterov-accelerated full-gradient descent with 1/L steps.
  const double l = lipschitz_estimate(obj);
  Vector x = Vector::Zero(obj.dim());
  Vector y = x;
  double t = 1.0;
  for (long k = 0; k < max_iterations; ++k) {
    const Vector grad = obj.gradient(y);
    const Vector x_next = y - grad / l;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
    if (obj.gradient(x).norm() <= tol) return x;
  }
  if (obj.gradient(x).norm() <= 1e3 * tol) return x;
  throw DataError("logistic_minimizer: did not reach tolerance; is lambda too small?");
}

Vector logistic_minimizer_cached(const LogisticObjective& obj, const std::string& dataset_path) {
  std::uint64_t hash = 0;
  {
    std::ifstream in(dataset_path, std::ios::binary);
    if (in) {
      std::ostringstream bytes;
      bytes << in.rdbuf();
      hash = fnv1a64(bytes.str());
    }
  }
  const std::string cache_path = dataset_path + ".xstar";
  {
    std::ifstream cache(cache_path);
    std::uint64_t cached_hash = 0;
    double cached_lambda = 0.0;
    int dim = 0;
    if (cache >> cached_hash >> cached_lambda >> dim && cached_hash == hash &&
        cached_lambda == obj.lambda() && dim == obj.dim()) {
      Vector x(dim);
      bool ok = true;
      for (int i = 0; i < dim && ok; ++i) ok = static_cast<bool>(cache >> x[i]);
      if (ok) return x;
    }
  }
  const Vector x = logistic_minimizer(obj);
  std::ofstream cache(cache_path);
  if (cache) {
    cache.precision(17);
    cache << hash << ' ' << obj.lambda() << ' ' << obj.dim() << '\n';
    for (int i = 0; i < obj.dim(); ++i) cache << x[i] << '\n';
  }
  return x;
}

GradientOracle::GradientOracle(QuadraticObjective obj, NoiseModel noise)
    : quadratic_(std::move(obj)), noise_(noise), minimizer_(quadratic_->minimizer()) {
  if (noise_.sigma < 0.0) throw std::invalid_argument("GradientOracle: negative sigma");
}

GradientOracle::GradientOracle(LogisticObjective obj, Vector minimizer)
    : logistic_(std::move(obj)), minimizer_(std::move(minimizer)) {
  if (minimizer_.size() != logistic_->dim())
    throw std::invalid_argument("GradientOracle: minimizer dimension mismatch");
}

int GradientOracle::dim() const { return quadratic_ ? quadratic_->dim() : logistic_->dim(); }

Vector GradientOracle::true_gradient(const Vector& x) const {
  return quadratic_ ? quadratic_->gradient(x) : logistic_->gradient(x);
}

Vector GradientOracle::sample_gradient(const Vector& x, Rng& rng) const {
  if (quadratic_) return noisy_query(x, quadratic_->gradient(x), noise_, rng).g;
  const int i = static_cast<int>(rng.uniform_index(logistic_->size()));
  return logistic_->example_gradient(i, x);
}

double GradientOracle::lipschitz() const {
  return quadratic_ ? lipschitz_estimate(*quadratic_) : lipschitz_estimate(*logistic_);
}

}  // namespace coco
