#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace coco {

using Vector = Eigen::VectorXd;

/// K query points with their noisy gradients and the smoothness constant
/// handed to the denoiser.
struct QuerySet {
  std::vector<Vector> points;
  std::vector<Vector> gradients;
  double lipschitz = 1.0;

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }

  /// Throws std::invalid_argument on dimension mismatch, K < 1 or L <= 0.
  void validate() const;
};

/// Ball constraint for the pair (m, l), m < l, in the recentred coordinates:
/// theta_m - theta_l must lie in B(center + L/2 (x_m - x_l), radius).
struct PairConstraint {
  int m = 0;
  int l = 0;
  Vector center;        ///< c_ml = (g_m - L/2 x_m) - (g_l - L/2 x_l)
  double radius = 0.0;  ///< r_ml = L/2 ||x_m - x_l||
};

/// Dual working representation: the K(K-1)/2 pair constraints in
/// lexicographic order (0,1),(0,2),...,(K-2,K-1) plus the smoothness constant
/// of the differentiable dual term. The difference operator A is kept
/// implicit; all products with A and A^T are formed pair-by-pair.
struct DualProblem {
  QuerySet query;
  std::vector<PairConstraint> pairs;
  int dim = 0;
  int pair_count = 0;
  double dual_lipschitz = 0.0;  ///< sigma_max^2(A); equals K for K >= 2
};

/// Dual variable plus the FISTA momentum state. Blocks are stored flat:
/// block p occupies s.segment(p * dim, dim).
struct DualState {
  Vector s;
  Vector y;
  double t = 1.0;
  int iteration = 0;

  static DualState zero(int pair_count, int dim);
};

struct DenoiseResult {
  std::vector<Vector> theta;          ///< denoised gradients, one block per query point
  DualState state;                    ///< final dual state (coalesced problem space)
  std::vector<double> dual_objective; ///< trace; [0] is the value at the initial point
  double feasibility = 0.0;           ///< feasibility_violation of theta
  int iterations = 0;
};

struct SolverConfig {
  int max_iterations = 500;      ///< plug-in default; use ~1e5 for oracle-grade solves
  double stop_tolerance = 1e-8;  ///< on the dual-iterate infinity-norm change
  bool warm_start = true;
  bool record_objective = true;  ///< keep the per-iteration dual objective trace
};

/// Exact two-point solution. Returns (g1, g2) when the observations are
/// already co-coercive, otherwise projects their difference onto the
/// constraint ball.
std::pair<Vector, Vector> coco2_closed_form(const Vector& x1, const Vector& x2,
                                            const Vector& g1, const Vector& g2,
                                            double lipschitz);

/// sigma_max^2 of the pairwise-difference operator on K blocks. A^T A is the
/// complete-graph Laplacian on K nodes applied blockwise, so this equals K.
double lipschitz_dual(int k);

DualProblem build_dual_problem(const QuerySet& q);

/// A A^T s, matrix-free, O(K^2 d).
Vector dual_gradient(const DualProblem& p, const Vector& s);

/// prox of mu * q*  where q*(s) = sum_ml r_ml ||s_ml|| - s_ml^T c_ml.
Vector prox_q_star(const Vector& s, double mu, const DualProblem& p);

/// 1/2 ||A^T s||^2 + sum_ml (r_ml ||s_ml|| - s_ml^T c_ml).
double dual_objective(const DualProblem& p, const Vector& s);

/// theta = g - A^T s, matrix-free.
std::vector<Vector> recover_primal(const DualProblem& p, const Vector& s);

/// FISTA on the dual with adaptive momentum restart; stops after
/// cfg.max_iterations or when the iterate change drops below
/// cfg.stop_tolerance. Exhausting the budget is not an error; the result
/// carries the iterations used.
DenoiseResult fdpg_solve(const DualProblem& p, const SolverConfig& cfg,
                         const DualState* init = nullptr);

/// max over pairs of max(0, ||theta_m - theta_l||^2 - L <theta_m - theta_l,
/// x_m - x_l>); zero iff theta is feasible.
double feasibility_violation(const std::vector<Vector>& theta, const QuerySet& q);

/// Identity of a constraint across sliding windows: the global ids of its two
/// points, smaller first.
using PairKey = std::pair<std::int64_t, std::int64_t>;

/// Lexicographic pair keys for a window given its point ids (oldest first).
std::vector<PairKey> pair_keys(const std::vector<std::int64_t>& ids);

/// Dual blocks copied for retained pairs, zeroed for pairs involving new
/// points; does not require equal window lengths. Momentum is reset.
DualState shift_dual_blocks(const DualState& prev, const std::vector<PairKey>& prev_pairs,
                            const std::vector<PairKey>& new_pairs, int dim);

/// Sliding-window warm start: both orderings must index windows of the same
/// length (throws std::invalid_argument otherwise).
DualState warm_start_shift(const DenoiseResult& prev, const std::vector<PairKey>& prev_pairs,
                           const std::vector<PairKey>& new_pairs);

/// Result of merging near-coincident query points: the merged problem plus,
/// for every original index, the merged group it belongs to.
struct Coalesced {
  QuerySet merged;
  std::vector<int> group;
  bool merged_any() const { return merged.size() != static_cast<int>(group.size()); }
};

double coalesce_tolerance(const QuerySet& q);

/// Merges points within coalesce_tolerance (gradients averaged); restores the
/// strict-distinctness precondition of the dual problem.
Coalesced coalesce(const QuerySet& q);

/// Full denoise entry point: coalesces, dispatches (K=1 passthrough, K=2
/// closed form, FDPG otherwise) and fans the estimates back out to the
/// original indices. `init`, when given, must match the coalesced problem.
DenoiseResult denoise(const QuerySet& q, const SolverConfig& cfg,
                      const DualState* init = nullptr);

}  // namespace coco
