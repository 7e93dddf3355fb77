#include <benchmark/benchmark.h>

#include "coco/denoiser.hpp"
#include "coco/rng.hpp"

using namespace coco;

namespace {

Vector random_vec(Rng& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

QuerySet random_query(Rng& rng, int k, int d) {
  QuerySet q;
  q.lipschitz = 1.0;
  for (int i = 0; i < k; ++i) {
    q.points.push_back(random_vec(rng, d, 1.0));
    q.gradients.push_back(random_vec(rng, d, 3.0));
  }
  return q;
}

void BM_ClosedFormCoco2(benchmark::State& state) {
  Rng rng(1);
  const int d = static_cast<int>(state.range(0));
  const QuerySet q = random_query(rng, 2, d);
  for (auto _ : state) {
    auto out = coco2_closed_form(q.points[0], q.points[1], q.gradients[0], q.gradients[1], 1.0);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ClosedFormCoco2)->Arg(2)->Arg(10)->Arg(100);

void BM_DualGradient(benchmark::State& state) {
  Rng rng(2);
  const int k = static_cast<int>(state.range(0)), d = 10;
  const DualProblem p = build_dual_problem(random_query(rng, k, d));
  const Vector s = random_vec(rng, p.pair_count * d, 1.0);
  for (auto _ : state) {
    Vector g = dual_gradient(p, s);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_DualGradient)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_FdpgCold(benchmark::State& state) {
  Rng rng(3);
  const int k = static_cast<int>(state.range(0)), d = 10;
  const DualProblem p = build_dual_problem(random_query(rng, k, d));
  SolverConfig cfg;
  cfg.max_iterations = 500;
  cfg.stop_tolerance = 1e-8;
  for (auto _ : state) {
    DenoiseResult res = fdpg_solve(p, cfg);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_FdpgCold)->Arg(4)->Arg(8)->Arg(16);

// Sliding-window solve with the previous dual variable shifted in.
void BM_FdpgWarmSlide(benchmark::State& state) {
  Rng rng(4);
  const int k = static_cast<int>(state.range(0)), d = 10;
  SolverConfig cfg;
  cfg.max_iterations = 100000;
  cfg.stop_tolerance = 1e-8;

  std::vector<Vector> points, gradients;
  std::vector<std::int64_t> ids;
  for (int i = 0; i < k; ++i) {
    points.push_back(random_vec(rng, d, 0.3));
    gradients.push_back(random_vec(rng, d, 3.0));
    ids.push_back(i);
  }
  QuerySet q{points, gradients, 1.0};
  DenoiseResult prev = fdpg_solve(build_dual_problem(q), cfg);
  auto prev_keys = pair_keys(ids);
  std::int64_t next_id = k;

  for (auto _ : state) {
    points.erase(points.begin());
    gradients.erase(gradients.begin());
    ids.erase(ids.begin());
    points.push_back(random_vec(rng, d, 0.3));
    gradients.push_back(random_vec(rng, d, 3.0));
    ids.push_back(next_id++);
    const QuerySet window{points, gradients, 1.0};
    const auto keys = pair_keys(ids);
    const DualState init = warm_start_shift(prev, prev_keys, keys);
    prev = fdpg_solve(build_dual_problem(window), cfg, &init);
    prev_keys = keys;
    benchmark::DoNotOptimize(prev);
  }
}
BENCHMARK(BM_FdpgWarmSlide)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
