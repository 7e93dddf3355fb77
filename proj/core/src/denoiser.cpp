#include "coco/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace coco {

void QuerySet::validate() const {
  if (points.empty()) throw std::invalid_argument("QuerySet: need at least one point");
  if (points.size() != gradients.size())
    throw std::invalid_argument("QuerySet: point/gradient count mismatch");
  if (!(lipschitz > 0.0)) throw std::invalid_argument("QuerySet: lipschitz must be positive");
  const auto d = points[0].size();
  if (d < 1) throw std::invalid_argument("QuerySet: dimension must be >= 1");
  for (const auto& x : points)
    if (x.size() != d) throw std::invalid_argument("QuerySet: inconsistent point dimension");
  for (const auto& g : gradients)
    if (g.size() != d) throw std::invalid_argument("QuerySet: inconsistent gradient dimension");
}

DualState DualState::zero(int pair_count, int dim) {
  DualState st;
  st.s = Vector::Zero(static_cast<Eigen::Index>(pair_count) * dim);
  st.y = st.s;
  st.t = 1.0;
  st.iteration = 0;
  return st;
}

std::pair<Vector, Vector> coco2_closed_form(const Vector& x1, const Vector& x2,
                                            const Vector& g1, const Vector& g2,
                                            double lipschitz) {
  if (x1.size() != x2.size() || g1.size() != g2.size() || x1.size() != g1.size())
    throw std::invalid_argument("coco2_closed_form: dimension mismatch");
  if (!(lipschitz > 0.0))
    throw std::invalid_argument("coco2_closed_form: lipschitz must be positive");

  const Vector dg = g1 - g2;
  const Vector dx = x1 - x2;
  if (dg.squaredNorm() <= lipschitz * dg.dot(dx)) return {g1, g2};

  const Vector u = dg - 0.5 * lipschitz * dx;
  const double u_norm = u.norm();
  // Inputs that zero this denominator satisfy the co-coercive branch above.
  if (u_norm == 0.0)
    throw std::logic_error("coco2_closed_form: singular projection direction");
  const Vector sum = g1 + g2;
  const Vector half_lx = 0.5 * lipschitz * dx;
  const Vector step = (0.25 * lipschitz * dx.norm() / u_norm) * u;
  return {0.5 * (sum + half_lx) + step, 0.5 * (sum - half_lx) - step};
}

double lipschitz_dual(int k) {
  if (k < 2) throw std::invalid_argument("lipschitz_dual: need K >= 2");
  return static_cast<double>(k);
}

double coalesce_tolerance(const QuerySet& q) {
  double max_coord = 0.0;
  for (const auto& x : q.points)
    max_coord = std::max(max_coord, x.lpNorm<Eigen::Infinity>());
  return 1e-12 * (1.0 + max_coord);
}

DualProblem build_dual_problem(const QuerySet& q) {
  q.validate();
  const int k = q.size();
  const double tol = coalesce_tolerance(q);
  DualProblem p;
  p.query = q;
  p.dim = q.dim();
  p.pair_count = k * (k - 1) / 2;
  p.dual_lipschitz = k >= 2 ? lipschitz_dual(k) : 0.0;
  p.pairs.reserve(p.pair_count);
  const double half_l = 0.5 * q.lipschitz;
  for (int m = 0; m < k; ++m) {
    for (int l = m + 1; l < k; ++l) {
      const Vector dx = q.points[m] - q.points[l];
      if (dx.lpNorm<Eigen::Infinity>() <= tol)
        throw std::invalid_argument("build_dual_problem: coincident points; coalesce first");
      PairConstraint c;
      c.m = m;
      c.l = l;
      c.center = (q.gradients[m] - half_l * q.points[m]) - (q.gradients[l] - half_l * q.points[l]);
      c.radius = half_l * dx.norm();
      p.pairs.push_back(std::move(c));
    }
  }
  return p;
}

namespace {

// beta = A^T s: block m gains +s_ml, block l gains -s_ml.
void apply_a_transpose(const DualProblem& p, const Vector& s, Vector& beta) {
  const int d = p.dim;
  beta.setZero(static_cast<Eigen::Index>(p.query.size()) * d);
  for (int i = 0; i < p.pair_count; ++i) {
    const auto block = s.segment(static_cast<Eigen::Index>(i) * d, d);
    beta.segment(static_cast<Eigen::Index>(p.pairs[i].m) * d, d) += block;
    beta.segment(static_cast<Eigen::Index>(p.pairs[i].l) * d, d) -= block;
  }
}

void check_dual_blocks(const DualProblem& p, const Vector& s, const char* where) {
  if (s.size() != static_cast<Eigen::Index>(p.pair_count) * p.dim)
    throw std::invalid_argument(std::string(where) + ": dual block structure mismatch");
}

}  // namespace

Vector dual_gradient(const DualProblem& p, const Vector& s) {
  check_dual_blocks(p, s, "dual_gradient");
  Vector beta;
  apply_a_transpose(p, s, beta);
  const int d = p.dim;
  Vector out(s.size());
  for (int i = 0; i < p.pair_count; ++i)
    out.segment(static_cast<Eigen::Index>(i) * d, d) =
        beta.segment(static_cast<Eigen::Index>(p.pairs[i].m) * d, d) -
        beta.segment(static_cast<Eigen::Index>(p.pairs[i].l) * d, d);
  return out;
}

Vector prox_q_star(const Vector& s, double mu, const DualProblem& p) {
  if (!(mu > 0.0)) throw std::invalid_argument("prox_q_star: mu must be positive");
  check_dual_blocks(p, s, "prox_q_star");
  const int d = p.dim;
  Vector out(s.size());
  Vector w(d);
  for (int i = 0; i < p.pair_count; ++i) {
    const auto s_block = s.segment(static_cast<Eigen::Index>(i) * d, d);
    w = p.pairs[i].center + s_block / mu;
    const double w_norm = w.norm();
    if (w_norm > p.pairs[i].radius) w *= p.pairs[i].radius / w_norm;
    out.segment(static_cast<Eigen::Index>(i) * d, d) = s_block - mu * (w - p.pairs[i].center);
  }
  return out;
}

double dual_objective(const DualProblem& p, const Vector& s) {
  check_dual_blocks(p, s, "dual_objective");
  Vector beta;
  apply_a_transpose(p, s, beta);
  double value = 0.5 * beta.squaredNorm();
  const int d = p.dim;
  for (int i = 0; i < p.pair_count; ++i) {
    const auto block = s.segment(static_cast<Eigen::Index>(i) * d, d);
    value += p.pairs[i].radius * block.norm() - block.dot(p.pairs[i].center);
  }
  return value;
}

std::vector<Vector> recover_primal(const DualProblem& p, const Vector& s) {
  check_dual_blocks(p, s, "recover_primal");
  Vector beta;
  apply_a_transpose(p, s, beta);
  const int d = p.dim;
  std::vector<Vector> theta(p.query.size());
  for (int k = 0; k < p.query.size(); ++k)
    theta[k] = p.query.gradients[k] - beta.segment(static_cast<Eigen::Index>(k) * d, d);
  return theta;
}

double feasibility_violation(const std::vector<Vector>& theta, const QuerySet& q) {
  if (theta.size() != q.points.size())
    throw std::invalid_argument("feasibility_violation: block count mismatch");
  double worst = 0.0;
  for (std::size_t m = 0; m < theta.size(); ++m) {
    for (std::size_t l = m + 1; l < theta.size(); ++l) {
      const Vector dt = theta[m] - theta[l];
      const double slack = dt.squaredNorm() - q.lipschitz * dt.dot(q.points[m] - q.points[l]);
      worst = std::max(worst, slack);
    }
  }
  return worst;
}

DenoiseResult fdpg_solve(const DualProblem& p, const SolverConfig& cfg, const DualState* init) {
  if (cfg.max_iterations < 1) throw std::invalid_argument("fdpg_solve: need max_iterations >= 1");
  if (cfg.stop_tolerance < 0.0) throw std::invalid_argument("fdpg_solve: negative stop tolerance");

  DenoiseResult res;
  if (p.pair_count == 0) {  // single point: unconstrained, theta = g
    res.theta = p.query.gradients;
    res.state = DualState::zero(0, p.dim);
    return res;
  }

  const int d = p.dim;
  const Eigen::Index n = static_cast<Eigen::Index>(p.pair_count) * d;
  Vector s_prev, y;
  double t = 1.0;
  if (init != nullptr) {
    check_dual_blocks(p, init->s, "fdpg_solve(init.s)");
    check_dual_blocks(p, init->y, "fdpg_solve(init.y)");
    s_prev = init->s;
    y = init->y;
    t = init->t;
  } else {
    s_prev = Vector::Zero(n);
    y = s_prev;
  }

  const double lp = p.dual_lipschitz;
  const double mu = 1.0 / lp;
  Vector beta(static_cast<Eigen::Index>(p.query.size()) * d);
  Vector s(n), w(d);

  if (cfg.record_objective) {
    res.dual_objective.reserve(static_cast<std::size_t>(cfg.max_iterations) + 1);
    res.dual_objective.push_back(dual_objective(p, s_prev));
  }

  int iter = 0;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    // gradient step on y, prox step into s, fused per pair
    apply_a_transpose(p, y, beta);
    double objective = 0.0;
    for (int i = 0; i < p.pair_count; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
      const auto arg = y.segment(off, d) -
                       mu * (beta.segment(static_cast<Eigen::Index>(p.pairs[i].m) * d, d) -
                             beta.segment(static_cast<Eigen::Index>(p.pairs[i].l) * d, d));
      w = p.pairs[i].center + arg * lp;
      const double w_norm = w.norm();
      if (w_norm > p.pairs[i].radius) w *= p.pairs[i].radius / w_norm;
      s.segment(off, d) = arg - mu * (w - p.pairs[i].center);
    }

    // adaptive restart: drop the momentum whenever it opposes descent,
    // otherwise the iterate change stalls along the flat dual directions
    if ((y - s).dot(s - s_prev) > 0.0) t = 1.0;

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    const double step_change = (s - s_prev).lpNorm<Eigen::Infinity>();
    y = s + momentum * (s - s_prev);
    s_prev.swap(s);
    t = t_next;
    iter = k;

    if (cfg.record_objective) {
      apply_a_transpose(p, s_prev, beta);
      objective = 0.5 * beta.squaredNorm();
      for (int i = 0; i < p.pair_count; ++i) {
        const auto block = s_prev.segment(static_cast<Eigen::Index>(i) * d, d);
        objective += p.pairs[i].radius * block.norm() - block.dot(p.pairs[i].center);
      }
      res.dual_objective.push_back(objective);
    }

    if (step_change <= cfg.stop_tolerance) break;
  }

  res.state.s = s_prev;
  res.state.y = y;
  res.state.t = t;
  res.state.iteration = iter;
  res.iterations = iter;
  res.theta = recover_primal(p, s_prev);
  res.feasibility = feasibility_violation(res.theta, p.query);
  return res;
}

std::vector<PairKey> pair_keys(const std::vector<std::int64_t>& ids) {
  std::vector<PairKey> keys;
  keys.reserve(ids.size() * (ids.size() - 1) / 2);
  for (std::size_t m = 0; m < ids.size(); ++m)
    for (std::size_t l = m + 1; l < ids.size(); ++l)
      keys.emplace_back(std::min(ids[m], ids[l]), std::max(ids[m], ids[l]));
  return keys;
}

DualState shift_dual_blocks(const DualState& prev, const std::vector<PairKey>& prev_pairs,
                            const std::vector<PairKey>& new_pairs, int dim) {
  if (prev.s.size() != static_cast<Eigen::Index>(prev_pairs.size()) * dim)
    throw std::invalid_argument("shift_dual_blocks: previous state/pair list mismatch");
  std::map<PairKey, int> index;
  for (std::size_t i = 0; i < prev_pairs.size(); ++i)
    index.emplace(prev_pairs[i], static_cast<int>(i));

  DualState st = DualState::zero(static_cast<int>(new_pairs.size()), dim);
  for (std::size_t i = 0; i < new_pairs.size(); ++i) {
    const auto it = index.find(new_pairs[i]);
    if (it != index.end())
      st.s.segment(static_cast<Eigen::Index>(i) * dim, dim) =
          prev.s.segment(static_cast<Eigen::Index>(it->second) * dim, dim);
  }
  st.y = st.s;
  return st;
}

DualState warm_start_shift(const DenoiseResult& prev, const std::vector<PairKey>& prev_pairs,
                           const std::vector<PairKey>& new_pairs) {
  if (prev_pairs.size() != new_pairs.size())
    throw std::invalid_argument("warm_start_shift: window lengths differ");
  if (prev.theta.empty()) throw std::invalid_argument("warm_start_shift: empty previous result");
  const int dim = static_cast<int>(prev.theta[0].size());
  return shift_dual_blocks(prev.state, prev_pairs, new_pairs, dim);
}

Coalesced coalesce(const QuerySet& q) {
  q.validate();
  const int k = q.size();
  const double tol = coalesce_tolerance(q);

  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int m = 0; m < k; ++m)
    for (int l = m + 1; l < k; ++l)
      if ((q.points[m] - q.points[l]).lpNorm<Eigen::Infinity>() <= tol)
        parent[find(l)] = find(m);

  Coalesced out;
  out.group.assign(k, -1);
  std::vector<int> root_to_group(k, -1);
  std::vector<int> counts;
  for (int i = 0; i < k; ++i) {
    const int r = find(i);
    if (root_to_group[r] < 0) {
      root_to_group[r] = static_cast<int>(out.merged.points.size());
      out.merged.points.push_back(Vector::Zero(q.dim()));
      out.merged.gradients.push_back(Vector::Zero(q.dim()));
      counts.push_back(0);
    }
    const int g = root_to_group[r];
    out.group[i] = g;
    out.merged.points[g] += q.points[i];
    out.merged.gradients[g] += q.gradients[i];
    ++counts[g];
  }
  for (std::size_t g = 0; g < counts.size(); ++g) {
    out.merged.points[g] /= counts[g];
    out.merged.gradients[g] /= counts[g];
  }
  out.merged.lipschitz = q.lipschitz;
  return out;
}

DenoiseResult denoise(const QuerySet& q, const SolverConfig& cfg, const DualState* init) {
  const Coalesced co = coalesce(q);
  const int merged_k = co.merged.size();

  DenoiseResult res;
  if (merged_k == 1) {
    res.theta.assign(1, co.merged.gradients[0]);
    res.state = DualState::zero(0, q.dim());
  } else if (merged_k == 2) {
    auto [t1, t2] = coco2_closed_form(co.merged.points[0], co.merged.points[1],
                                      co.merged.gradients[0], co.merged.gradients[1],
                                      co.merged.lipschitz);
    res.state.s = co.merged.gradients[0] - t1;  // theta = g - A^T s with A = [I, -I]
    res.state.y = res.state.s;
    res.theta = {std::move(t1), std::move(t2)};
  } else {
    const DualProblem p = build_dual_problem(co.merged);
    res = fdpg_solve(p, cfg, init);
  }

  if (co.merged_any()) {
    std::vector<Vector> fanned(q.size());
    for (int i = 0; i < q.size(); ++i) fanned[i] = res.theta[co.group[i]];
    res.theta = std::move(fanned);
    res.feasibility = feasibility_violation(res.theta, q);
  } else if (merged_k <= 2) {
    res.feasibility = feasibility_violation(res.theta, q);
  }
  return res;
}

}  // namespace coco
