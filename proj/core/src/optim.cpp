#include "coco/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace coco {

void sgd_step(SgdState& st, const Vector& g) {
  if (g.size() != st.x.size()) throw std::invalid_argument("sgd_step: dimension mismatch");
  ++st.steps_taken;
  const double gamma = st.decreasing ? st.schedule_c / st.steps_taken : st.gamma;
  st.x -= gamma * g;
}

AdamState AdamState::init(Vector x0, double gamma) {
  AdamState st;
  st.m = Vector::Zero(x0.size());
  st.v = Vector::Zero(x0.size());
  st.x = std::move(x0);
  st.gamma = gamma;
  return st;
}

void adam_step(AdamState& st, const Vector& g) {
  if (g.size() != st.x.size()) throw std::invalid_argument("adam_step: dimension mismatch");
  ++st.steps_taken;
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * g;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * g.cwiseProduct(g);
  const double m_scale = 1.0 / (1.0 - std::pow(st.beta1, st.steps_taken));
  const double v_scale = 1.0 / (1.0 - std::pow(st.beta2, st.steps_taken));
  st.x -= st.gamma * (m_scale * st.m.array() /
                      ((v_scale * st.v.array()).sqrt() + st.epsilon))
                         .matrix();
}

StrsagaState StrsagaState::init(Vector x0, double gamma) {
  StrsagaState st;
  st.table_sum = Vector::Zero(x0.size());
  st.x = std::move(x0);
  st.gamma = gamma;
  return st;
}

void strsaga_op(StrsagaState& st, const LogisticObjective& obj, Rng& rng, bool try_insert_new,
                const GradientFilter& filter) {
  const bool insert_new = try_insert_new && st.arrived < obj.size();
  if (!insert_new && st.arrived == 0)
    throw std::invalid_argument("strsaga_op: no arrived examples to revisit");
  const int i = insert_new ? static_cast<int>(st.arrived)
                           : static_cast<int>(rng.uniform_index(st.arrived));

  Vector g = obj.example_gradient(i, st.x);
  if (filter) g = filter(st.x, g);

  Vector direction = g;
  if (insert_new) {
    if (st.arrived > 0) direction += st.table_sum / st.arrived;
    st.table.push_back(g);
    st.table_sum += g;
    ++st.arrived;
  } else {
    direction += -st.table[i] + st.table_sum / st.arrived;
    st.table_sum += g - st.table[i];
    st.table[i] = g;
  }
  st.x -= st.gamma * direction;
}

void strsaga_step(StrsagaState& st, const LogisticObjective& obj, const StrsagaSchedule& schedule,
                  Rng& rng, const GradientFilter& filter) {
  for (int op = 0; op < schedule.ops_per_step; ++op)
    strsaga_op(st, obj, rng, op < schedule.arrivals_per_step, filter);
}

void OnlineMean::add(const Vector& x) {
  if (count == 0)
    mean = x;
  else
    mean += (x - mean) / (count + 1);
  ++count;
}

Vector pr_average(const std::vector<Vector>& iterates) {
  if (iterates.empty()) throw std::invalid_argument("pr_average: empty iterate list");
  OnlineMean acc;
  for (const auto& x : iterates) acc.add(x);
  return acc.mean;
}

CocoWindow::CocoWindow(int capacity, double lipschitz, SolverConfig solver)
    : capacity_(capacity), lipschitz_(lipschitz), solver_(solver) {
  if (capacity_ < 0) throw std::invalid_argument("CocoWindow: negative capacity");
  if (!(lipschitz_ > 0.0)) throw std::invalid_argument("CocoWindow: lipschitz must be positive");
}

Vector CocoWindow::denoise(const Vector& x_new, const Vector& g_new) {
  points_.push_back(x_new);
  gradients_.push_back(g_new);
  ids_.push_back(next_id_++);
  if (capacity_ > 0 && static_cast<int>(points_.size()) > capacity_) {
    points_.pop_front();
    gradients_.pop_front();
    ids_.pop_front();
  }
  if (points_.size() == 1) {
    last_valid_ = false;
    return g_new;
  }

  QuerySet q;
  q.points.assign(points_.begin(), points_.end());
  q.gradients.assign(gradients_.begin(), gradients_.end());
  q.lipschitz = lipschitz_;

  const Coalesced co = coalesce(q);
  const auto keys = pair_keys({ids_.begin(), ids_.end()});

  DualState init;
  const DualState* init_ptr = nullptr;
  if (solver_.warm_start && last_valid_ && !co.merged_any() && co.merged.size() >= 3) {
    init = shift_dual_blocks(last_.state, last_keys_, keys, q.dim());
    init_ptr = &init;
  }

  last_ = coco::denoise(q, solver_, init_ptr);
  last_keys_ = keys;
  last_valid_ = !co.merged_any();
  return last_.theta.back();  // newest point's estimate feeds the step
}

namespace {

double report(Trajectory& traj, const Vector& x, const Vector& x_star, long long calls,
              OnlineMean* average) {
  const Vector* reported = &x;
  if (average != nullptr) {
    average->add(x);
    reported = &average->mean;
  }
  const double dist = (*reported - x_star).norm();
  traj.points.push_back({calls, *reported, dist});
  return dist;
}

}  // namespace

Trajectory run_optimizer(const GradientOracle& oracle, const OptimizerSpec& spec,
                         const std::optional<CocoSpec>& coco, const Vector& x0, long budget,
                         std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("run_optimizer: budget must be >= 1");
  if (x0.size() != oracle.dim()) throw std::invalid_argument("run_optimizer: x0 dimension");

  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  const Vector& x_star = oracle.minimizer();

  OnlineMean average_state;
  OnlineMean* average = spec.polyak_ruppert ? &average_state : nullptr;

  std::optional<CocoWindow> window;
  if (coco.has_value()) window.emplace(coco->window, oracle.lipschitz(), coco->solver);
  auto filtered = [&](const Vector& x, const Vector& g) {
    return window ? window->denoise(x, g) : g;
  };

  report(traj, x0, x_star, 0, average);

  if (spec.algorithm == Algorithm::Strsaga) {
    if (oracle.is_quadratic())
      throw std::invalid_argument("run_optimizer: STRSAGA requires a finite-sum objective");
    const StrsagaSchedule schedule;
    StrsagaState st = StrsagaState::init(x0, spec.gamma);
    long long calls = 0;
    while (calls < budget) {
      for (int op = 0; op < schedule.ops_per_step && calls < budget; ++op) {
        strsaga_op(st, oracle.logistic(), rng, op < schedule.arrivals_per_step, filtered);
        ++calls;
        if (!st.x.allFinite()) {
          traj.diverged = true;
          return traj;
        }
        report(traj, st.x, x_star, calls, average);
      }
    }
    return traj;
  }

  SgdState sgd{x0, spec.gamma, spec.decreasing, spec.schedule_c};
  AdamState adam = AdamState::init(x0, spec.gamma);
  adam.beta1 = spec.beta1;
  adam.beta2 = spec.beta2;
  adam.epsilon = spec.epsilon;
  Vector* x = spec.algorithm == Algorithm::Adam ? &adam.x : &sgd.x;

  for (long long calls = 1; calls <= budget; ++calls) {
    const Vector g = filtered(*x, oracle.sample_gradient(*x, rng));
    if (spec.algorithm == Algorithm::Adam)
      adam_step(adam, g);
    else
      sgd_step(sgd, g);
    if (!x->allFinite()) {
      traj.diverged = true;
      return traj;
    }
    report(traj, *x, x_star, calls, average);
  }
  return traj;
}

}  // namespace coco
