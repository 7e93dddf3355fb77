#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "coco/denoiser.hpp"
#include "coco/oracles.hpp"

namespace coco {

struct SgdState {
  Vector x;
  double gamma = 0.1;         ///< fixed step size
  bool decreasing = false;    ///< use gamma_k = schedule_c / k instead
  double schedule_c = 1.0;
  long steps_taken = 0;
};

/// x <- x - gamma_k g; the decreasing schedule is 1-based.
void sgd_step(SgdState& st, const Vector& g);

struct AdamState {
  Vector x;
  Vector m;
  Vector v;
  long steps_taken = 0;
  double gamma = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(Vector x0, double gamma);
};

void adam_step(AdamState& st, const Vector& g);

/// Replaces the raw oracle gradient before an optimizer consumes it; used to
/// route STRSAGA's per-example gradients through a denoiser.
using GradientFilter = std::function<Vector(const Vector& x, const Vector& g)>;

struct StrsagaState {
  Vector x;
  double gamma = 0.1;
  std::vector<Vector> table;  ///< stored gradient per arrived example
  Vector table_sum;           ///< maintained incrementally
  long arrived = 0;

  static StrsagaState init(Vector x0, double gamma);
};

struct StrsagaSchedule {
  int ops_per_step = 2;       ///< update operations per logical step (rho)
  int arrivals_per_step = 1;  ///< new examples arriving per logical step
};

/// One update operation: inserts the next unarrived example when
/// `try_insert_new` and one remains, otherwise revisits a uniformly random
/// arrived example. Direction is g_i(x) - table_i + table_mean. Consumes one
/// oracle call.
void strsaga_op(StrsagaState& st, const LogisticObjective& obj, Rng& rng, bool try_insert_new,
                const GradientFilter& filter = nullptr);

/// One logical step: `ops_per_step` update operations, the first
/// `arrivals_per_step` of which insert new examples while any remain.
void strsaga_step(StrsagaState& st, const LogisticObjective& obj, const StrsagaSchedule& schedule,
                  Rng& rng, const GradientFilter& filter = nullptr);

/// Running mean of iterates, updatable online.
struct OnlineMean {
  Vector mean;
  long count = 0;
  void add(const Vector& x);
};

/// Polyak-Ruppert average of x_0..x_k.
Vector pr_average(const std::vector<Vector>& iterates);

/// Sliding window of (point, noisy gradient) pairs with warm-started COCO
/// solves; capacity 0 keeps the full history.
class CocoWindow {
 public:
  CocoWindow(int capacity, double lipschitz, SolverConfig solver = {});

  /// Pushes the newest pair (evicting the oldest when full), denoises the
  /// window and returns the estimate for the newest point.
  Vector denoise(const Vector& x_new, const Vector& g_new);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(points_.size()); }
  const DenoiseResult& last_result() const { return last_; }

 private:
  int capacity_;
  double lipschitz_;
  SolverConfig solver_;
  std::deque<Vector> points_;
  std::deque<Vector> gradients_;
  std::deque<std::int64_t> ids_;
  std::int64_t next_id_ = 0;
  DenoiseResult last_;
  std::vector<PairKey> last_keys_;
  bool last_valid_ = false;  ///< last solve usable for warm starting
};

enum class Algorithm { Sgd, Adam, Strsaga };

struct OptimizerSpec {
  Algorithm algorithm = Algorithm::Sgd;
  double gamma = 0.1;
  bool decreasing = false;  ///< SGD only
  double schedule_c = 1.0;
  double beta1 = 0.9;  ///< Adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool polyak_ruppert = false;  ///< report the running iterate average
};

struct CocoSpec {
  int window = 2;  ///< 0 keeps the full history
  SolverConfig solver;
};

struct TrajectoryPoint {
  long long oracle_calls = 0;
  Vector x;  ///< reported iterate (the PR average when enabled)
  double distance = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::uint64_t seed = 0;
  bool diverged = false;
};

/// Runs query -> (optional denoise) -> step until `budget` oracle calls,
/// recording the distance to the oracle's minimizer after every call. A
/// non-finite iterate aborts the run and flags the trajectory.
Trajectory run_optimizer(const GradientOracle& oracle, const OptimizerSpec& spec,
                         const std::optional<CocoSpec>& coco, const Vector& x0, long budget,
                         std::uint64_t seed);

}  // namespace coco
