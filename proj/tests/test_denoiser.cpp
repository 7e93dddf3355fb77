#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coco/denoiser.hpp"
#include "helpers.hpp"

using namespace coco;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("coco2_closed_form keeps co-coercive observations") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform_index(5));
    const Vector x1 = test::random_vector(rng, d, 2.0);
    const Vector x2 = test::random_vector(rng, d, 2.0);
    // exact gradients of f(x) = 1/2 ||x||^2 are co-coercive for L >= 1
    auto [t1, t2] = coco2_closed_form(x1, x2, x1, x2, 1.5);
    CHECK(t1 == x1);
    CHECK(t2 == x2);
  }
}

TEST_CASE("coco2_closed_form collapses to the mean at coincident points") {
  const Vector x = vec({0.3, -1.2});
  const auto [t1, t2] = coco2_closed_form(x, x, vec({2.0, 0.0}), vec({-1.0, 4.0}), 1.0);
  CHECK(t1.isApprox(vec({0.5, 2.0}), 1e-14));
  CHECK(t2.isApprox(vec({0.5, 2.0}), 1e-14));
}

TEST_CASE("coco2_closed_form frozen 1-d instance matches the grid oracle") {
  const auto [t1, t2] = coco2_closed_form(vec({1.0}), vec({0.0}), vec({2.0}), vec({0.0}), 1.0);
  CHECK(t1[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(t2[0] == doctest::Approx(0.5).epsilon(1e-12));

  const double pitch = 4.0 / 2000;
  const auto [b1, b2] = test::grid_coco2_1d(1.0, 0.0, 2.0, 0.0, 1.0, -1.0, 3.0, 2001);
  CHECK(std::abs(t1[0] - b1) <= pitch);
  CHECK(std::abs(t2[0] - b2) <= pitch);
}

TEST_CASE("coco2_closed_form matches the grid oracle on random 1-d instances") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const double x1 = rng.uniform_in(-2, 2), x2 = rng.uniform_in(-2, 2);
    const double g1 = rng.uniform_in(-3, 3), g2 = rng.uniform_in(-3, 3);
    const double lipschitz = rng.uniform_in(0.5, 2.0);
    const auto [t1, t2] = coco2_closed_form(vec({x1}), vec({x2}), vec({g1}), vec({g2}), lipschitz);
    const double pitch = 12.0 / 4000;
    const auto [b1, b2] = test::grid_coco2_1d(x1, x2, g1, g2, lipschitz, -6.0, 6.0, 4001);
    CHECK(std::abs(t1[0] - b1) <= 2 * pitch);
    CHECK(std::abs(t2[0] - b2) <= 2 * pitch);
  }
}

TEST_CASE("coco2_closed_form output is feasible and conserves the centroid") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform_index(5));
    const Vector x1 = test::random_vector(rng, d, 2.0), x2 = test::random_vector(rng, d, 2.0);
    const Vector g1 = test::random_vector(rng, d, 3.0), g2 = test::random_vector(rng, d, 3.0);
    const double lipschitz = rng.uniform_in(0.5, 2.0);
    const auto [t1, t2] = coco2_closed_form(x1, x2, g1, g2, lipschitz);

    QuerySet q{{x1, x2}, {g1, g2}, lipschitz};
    CHECK(feasibility_violation({t1, t2}, q) <= 1e-9);
    CHECK((t1 + t2 - g1 - g2).norm() <= 1e-8 * (1.0 + (g1 + g2).norm()));
  }
}

TEST_CASE("coco2_closed_form rejects bad inputs") {
  CHECK_THROWS_AS(coco2_closed_form(vec({1, 2}), vec({1}), vec({1, 2}), vec({1, 2}), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(coco2_closed_form(vec({1}), vec({0}), vec({1}), vec({0}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("lipschitz_dual matches power iteration on the explicit operator") {
  CHECK(lipschitz_dual(2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(lipschitz_dual(3) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(lipschitz_dual(8) == doctest::Approx(8.0).epsilon(1e-10));
  for (int k = 2; k <= 10; ++k) {
    const Eigen::MatrixXd a = test::dense_difference_operator(k, 1);
    const double reference = test::power_iteration(a * a.transpose());
    CHECK(lipschitz_dual(k) == doctest::Approx(reference).epsilon(1e-8));
  }
  CHECK_THROWS_AS(lipschitz_dual(1), std::invalid_argument);
}

TEST_CASE("build_dual_problem produces the documented constraint data") {
  QuerySet q{{vec({1.0}), vec({0.0})}, {vec({3.0}), vec({1.0})}, 2.0};
  const DualProblem p = build_dual_problem(q);
  REQUIRE(p.pair_count == 1);
  CHECK(p.pairs[0].center[0] == doctest::Approx(1.0));
  CHECK(p.pairs[0].radius == doctest::Approx(1.0));
  CHECK(p.dual_lipschitz == doctest::Approx(2.0));
}

TEST_CASE("build_dual_problem enumerates pairs lexicographically") {
  Rng rng(5);
  const QuerySet q = test::random_query_set(rng, 3, 2, 1.0, 1.0, 1.0);
  const DualProblem p = build_dual_problem(q);
  REQUIRE(p.pair_count == 3);
  CHECK(p.pairs[0].m == 0);
  CHECK(p.pairs[0].l == 1);
  CHECK(p.pairs[1].m == 0);
  CHECK(p.pairs[1].l == 2);
  CHECK(p.pairs[2].m == 1);
  CHECK(p.pairs[2].l == 2);
  for (const auto& pair : p.pairs) CHECK(pair.radius > 0.0);
}

TEST_CASE("build_dual_problem rejects coincident points") {
  const Vector x = vec({1.0, 2.0});
  QuerySet q{{x, x, vec({0.0, 0.0})}, {vec({1, 1}), vec({2, 2}), vec({0, 0})}, 1.0};
  CHECK_THROWS_AS(build_dual_problem(q), std::invalid_argument);
}

TEST_CASE("dual_gradient is the matrix-free A A^T") {
  Rng rng(11);
  SUBCASE("zero maps to zero and the 1x1 case is explicit") {
    QuerySet q{{vec({1.0}), vec({0.0})}, {vec({3.0}), vec({1.0})}, 2.0};
    const DualProblem p = build_dual_problem(q);
    CHECK(dual_gradient(p, Vector::Zero(1)).norm() == 0.0);
    CHECK(dual_gradient(p, vec({1.0}))[0] == doctest::Approx(2.0));
  }
  SUBCASE("matches the dense operator and is PSD") {
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 2 + static_cast<int>(rng.uniform_index(5));
      const int d = 1 + static_cast<int>(rng.uniform_index(3));
      const QuerySet q = test::random_query_set(rng, k, d, 2.0, 1.0, 1.0);
      const DualProblem p = build_dual_problem(q);
      const Vector s = test::random_vector(rng, p.pair_count * d, 1.0);
      const Eigen::MatrixXd a = test::dense_difference_operator(k, d);
      const Vector expected = a * (a.transpose() * s);
      const Vector got = dual_gradient(p, s);
      CHECK((got - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(s.dot(got) >= -1e-12);
    }
  }
}

TEST_CASE("prox_q_star matches its definition") {
  QuerySet feasible{{vec({1.0}), vec({0.0})}, {vec({0.6}), vec({0.2})}, 1.0};
  const DualProblem p = build_dual_problem(feasible);  // c = -0.1, r = 0.5

  SUBCASE("zero block stays zero when the center is inside the ball") {
    CHECK(prox_q_star(Vector::Zero(1), 1.0, p).norm() == 0.0);
  }
  SUBCASE("full shrinkage whenever c + s/mu stays inside the ball") {
    const Vector s = vec({0.3});  // c + s/mu = 0.2, inside radius 0.5
    CHECK(prox_q_star(s, 1.0, p).norm() == 0.0);
  }
  SUBCASE("frozen 1-d instance against the grid oracle") {
    QuerySet q{{vec({2.0}), vec({0.0})}, {vec({2.0}), vec({0.0})}, 1.0};
    // center = (2-1)-(0-0) = 1... build a pair with c = 0, r = 1 directly
    DualProblem manual = build_dual_problem(q);
    manual.pairs[0].center = vec({0.0});
    manual.pairs[0].radius = 1.0;
    const Vector out = prox_q_star(vec({3.0}), 1.0, manual);
    CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-12));
    const double grid = test::grid_prox_1d(3.0, 1.0, 0.0, 1.0, -6.0, 6.0, 6001);
    CHECK(std::abs(out[0] - grid) <= 12.0 / 6000);
  }
  SUBCASE("random 1-d instances against the grid oracle") {
    Rng rng(13);
    DualProblem manual = p;
    for (int trial = 0; trial < 25; ++trial) {
      manual.pairs[0].center = vec({rng.uniform_in(-2, 2)});
      manual.pairs[0].radius = rng.uniform_in(0.0, 2.0);
      const double mu = rng.uniform_in(0.2, 3.0);
      const double s = rng.uniform_in(-4, 4);
      const Vector out = prox_q_star(vec({s}), mu, manual);
      const double grid = test::grid_prox_1d(s, mu, manual.pairs[0].center[0],
                                             manual.pairs[0].radius, -10.0, 10.0, 20001);
      CHECK(std::abs(out[0] - grid) <= 2 * 20.0 / 20000);
    }
  }
  SUBCASE("nonpositive mu is rejected") {
    CHECK_THROWS_AS(prox_q_star(Vector::Zero(1), 0.0, p), std::invalid_argument);
  }
}

TEST_CASE("recover_primal applies -A^T s + g") {
  QuerySet q{{vec({1.0}), vec({0.0})}, {vec({2.0}), vec({0.0})}, 1.0};
  const DualProblem p = build_dual_problem(q);
  SUBCASE("zero dual returns the observations") {
    const auto theta = recover_primal(p, Vector::Zero(1));
    CHECK(theta[0] == q.gradients[0]);
    CHECK(theta[1] == q.gradients[1]);
  }
  SUBCASE("frozen example") {
    const auto theta = recover_primal(p, vec({0.5}));
    CHECK(theta[0][0] == doctest::Approx(1.5));
    CHECK(theta[1][0] == doctest::Approx(0.5));
  }
  SUBCASE("centroid of theta equals centroid of g for any s") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 2 + static_cast<int>(rng.uniform_index(5));
      const QuerySet random = test::random_query_set(rng, k, 3, 2.0, 3.0, 1.0);
      const DualProblem problem = build_dual_problem(random);
      const Vector s = test::random_vector(rng, problem.pair_count * 3, 1.0);
      const auto theta = recover_primal(problem, s);
      CHECK((test::mean_of(theta) - test::mean_of(random.gradients)).norm() <= 1e-12 * k);
    }
  }
}

TEST_CASE("feasibility_violation") {
  SUBCASE("exact gradients of a smooth convex quadratic are feasible") {
    Rng rng(19);
    const Vector eigs = vec({0.3, 0.7, 1.0});
    QuerySet q;
    q.lipschitz = 1.0;
    for (int i = 0; i < 5; ++i) {
      const Vector x = test::random_vector(rng, 3, 2.0);
      q.points.push_back(x);
      q.gradients.push_back(eigs.cwiseProduct(x));
    }
    CHECK(feasibility_violation(q.gradients, q) <= 1e-12);
  }
  SUBCASE("frozen violated instance") {
    QuerySet q{{vec({1.0}), vec({0.0})}, {vec({0.0}), vec({0.0})}, 1.0};
    CHECK(feasibility_violation({vec({2.0}), vec({0.0})}, q) == doctest::Approx(2.0));
  }
  SUBCASE("closed-form outputs are feasible on random instances") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const QuerySet q = test::random_query_set(rng, 2, 4, 1.5, 2.5, 1.0);
      const auto [t1, t2] =
          coco2_closed_form(q.points[0], q.points[1], q.gradients[0], q.gradients[1], q.lipschitz);
      CHECK(feasibility_violation({t1, t2}, q) <= 1e-9);
    }
  }
}

TEST_CASE("fdpg_solve returns the observations on feasible input") {
  Rng rng(29);
  QuerySet q;
  q.lipschitz = 1.5;  // above the true constant, constraints strictly inactive
  const Vector eigs = vec({0.4, 0.8, 1.0});
  for (int i = 0; i < 4; ++i) {
    const Vector x = test::random_vector(rng, 3, 2.0);
    q.points.push_back(x);
    q.gradients.push_back(eigs.cwiseProduct(x));
  }
  const DualProblem p = build_dual_problem(q);
  const DenoiseResult res = fdpg_solve(p, SolverConfig{});
  CHECK(res.state.s.norm() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(res.theta[i] == q.gradients[i]);
  CHECK(res.feasibility == 0.0);
}

TEST_CASE("fdpg_solve matches the closed form on violated two-point instances") {
  QuerySet q{{vec({1.0}), vec({0.0})}, {vec({2.0}), vec({0.0})}, 1.0};
  const DualProblem p = build_dual_problem(q);
  SolverConfig cfg;
  cfg.max_iterations = 10000;
  cfg.stop_tolerance = 1e-12;
  const DenoiseResult res = fdpg_solve(p, cfg);
  CHECK(std::abs(res.theta[0][0] - 1.5) <= 1e-6);
  CHECK(std::abs(res.theta[1][0] - 0.5) <= 1e-6);
}

TEST_CASE("fdpg_solve long-run solutions satisfy the optimality conditions") {
  Rng rng(31);
  SolverConfig cfg;
  cfg.max_iterations = 100000;
  cfg.stop_tolerance = 1e-12;
  for (int trial = 0; trial < 5; ++trial) {
    const QuerySet q = test::random_query_set(rng, 3, 2, 1.0, 2.0, 1.0);
    const DualProblem p = build_dual_problem(q);
    const DenoiseResult res = fdpg_solve(p, cfg);
    // primal feasibility
    CHECK(res.feasibility <= 1e-6);
    // dual stationarity: s is a fixed point of the prox-gradient map
    const Vector step =
        res.state.s - dual_gradient(p, res.state.s) / p.dual_lipschitz;
    const Vector mapped = prox_q_star(step, 1.0 / p.dual_lipschitz, p);
    CHECK((mapped - res.state.s).lpNorm<Eigen::Infinity>() <= 1e-6);
    // centroid conservation is structural
    CHECK((test::mean_of(res.theta) - test::mean_of(q.gradients)).norm() <= 1e-10);
  }
}

TEST_CASE("fdpg_solve dual objective does not increase endpoint versus start") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const QuerySet q = test::random_query_set(rng, 5, 3, 1.0, 3.0, 0.8);
    const DualProblem p = build_dual_problem(q);
    SolverConfig cfg;
    cfg.max_iterations = 2000;
    cfg.stop_tolerance = 1e-10;
    const DenoiseResult res = fdpg_solve(p, cfg);
    REQUIRE(res.dual_objective.size() >= 2);
    const double start = res.dual_objective.front();
    const double end = res.dual_objective.back();
    CHECK(end <= start + 1e-12 * (1.0 + std::abs(start)));
  }
}

TEST_CASE("fdpg_solve reports budget exhaustion instead of failing") {
  Rng rng(41);
  const QuerySet q = test::random_query_set(rng, 4, 2, 1.0, 5.0, 0.5);
  const DualProblem p = build_dual_problem(q);
  SolverConfig cfg;
  cfg.max_iterations = 3;
  cfg.stop_tolerance = 0.0;
  const DenoiseResult res = fdpg_solve(p, cfg);
  CHECK(res.iterations == 3);
  CHECK(res.dual_objective.size() == 4);
}

TEST_CASE("warm_start_shift copies retained pairs and zeroes new ones") {
  const int d = 2;
  DenoiseResult prev;
  prev.theta = {Vector::Zero(d), Vector::Zero(d), Vector::Zero(d)};
  prev.state = DualState::zero(3, d);
  prev.state.s << 1, 2, 3, 4, 5, 6;  // blocks (1,2): [1,2], (1,3): [3,4], (2,3): [5,6]
  prev.state.y = prev.state.s;
  prev.state.t = 9.0;

  const auto prev_keys = pair_keys({1, 2, 3});
  const auto new_keys = pair_keys({2, 3, 4});
  const DualState st = warm_start_shift(prev, prev_keys, new_keys);
  CHECK(st.s.segment(0, d).isApprox(vec({5.0, 6.0})));  // pair (2,3) retained
  CHECK(st.s.segment(d, d).norm() == 0.0);              // (2,4) new
  CHECK(st.s.segment(2 * d, d).norm() == 0.0);          // (3,4) new
  CHECK(st.y == st.s);
  CHECK(st.t == 1.0);

  SUBCASE("identical window keeps the full dual variable with reset momentum") {
    const DualState same = warm_start_shift(prev, prev_keys, prev_keys);
    CHECK(same.s == prev.state.s);
    CHECK(same.t == 1.0);
  }
  SUBCASE("window-length mismatch is rejected") {
    CHECK_THROWS_AS(warm_start_shift(prev, prev_keys, pair_keys({2, 3, 4, 5})),
                    std::invalid_argument);
  }
  SUBCASE("cold start is the all-zero state") {
    const DualState cold = DualState::zero(3, d);
    CHECK(cold.s.norm() == 0.0);
    CHECK(cold.t == 1.0);
  }
}

TEST_CASE("coalesce merges near-coincident points and averages their gradients") {
  const Vector x = vec({1.0, -2.0});
  QuerySet q{{x, x + vec({1e-15, 0.0}), vec({4.0, 4.0})},
             {vec({1.0, 0.0}), vec({3.0, 2.0}), vec({5.0, 5.0})},
             1.0};
  const Coalesced co = coalesce(q);
  REQUIRE(co.merged.size() == 2);
  CHECK(co.merged_any());
  CHECK(co.group[0] == co.group[1]);
  CHECK(co.group[2] != co.group[0]);
  CHECK(co.merged.gradients[co.group[0]].isApprox(vec({2.0, 1.0})));

  SUBCASE("all points coincident merge to a single averaged block") {
    QuerySet same{{x, x, x}, {vec({3.0, 0.0}), vec({0.0, 3.0}), vec({0.0, 0.0})}, 1.0};
    const Coalesced all = coalesce(same);
    REQUIRE(all.merged.size() == 1);
    CHECK(all.merged.gradients[0].isApprox(vec({1.0, 1.0})));
  }
}

TEST_CASE("denoise fans coalesced estimates back out") {
  const Vector x = vec({0.5});
  QuerySet q{{x, x}, {vec({2.0}), vec({0.0})}, 1.0};
  const DenoiseResult res = denoise(q, SolverConfig{});
  CHECK(res.theta[0][0] == doctest::Approx(1.0));
  CHECK(res.theta[1][0] == doctest::Approx(1.0));
  CHECK(res.feasibility == 0.0);
}

TEST_CASE("denoise conserves the centroid across solver paths") {
  Rng rng(43);
  SolverConfig cfg;
  cfg.max_iterations = 5000;
  cfg.stop_tolerance = 1e-10;
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_index(7));
    const int d = 1 + static_cast<int>(rng.uniform_index(4));
    const QuerySet q = test::random_query_set(rng, k, d, 1.5, 3.0, 1.0);
    const DenoiseResult res = denoise(q, cfg);
    const Vector mg = test::mean_of(q.gradients);
    CHECK((test::mean_of(res.theta) - mg).norm() <= 1e-8 * (1.0 + mg.norm()));
  }
}

TEST_CASE("denoise contracts the error towards exact gradients (per realization)") {
  Rng rng(47);
  const Vector eigs = vec({0.4, 0.7, 1.0});
  SolverConfig cfg;
  cfg.max_iterations = 20000;
  cfg.stop_tolerance = 1e-10;
  for (int trial = 0; trial < 50; ++trial) {
    QuerySet q;
    q.lipschitz = 1.5;  // above the true constant
    std::vector<Vector> truth;
    for (int i = 0; i < 4; ++i) {
      const Vector x = test::random_vector(rng, 3, 2.0);
      q.points.push_back(x);
      truth.push_back(eigs.cwiseProduct(x));
      q.gradients.push_back(truth.back() + test::random_vector(rng, 3, 2.0));
    }
    const DenoiseResult res = denoise(q, cfg);
    double err_theta = 0.0, err_g = 0.0;
    for (int i = 0; i < 4; ++i) {
      err_theta += (res.theta[i] - truth[i]).squaredNorm();
      err_g += (q.gradients[i] - truth[i]).squaredNorm();
    }
    CHECK(std::sqrt(err_theta) <= std::sqrt(err_g) + 1e-6);
  }
}

TEST_CASE("denoise is idempotent on feasible observations") {
  Rng rng(53);
  const Vector eigs = vec({0.5, 1.0});
  SolverConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    QuerySet q;
    q.lipschitz = 1.3;
    for (int i = 0; i < 5; ++i) {
      const Vector x = test::random_vector(rng, 2, 3.0);
      q.points.push_back(x);
      q.gradients.push_back(eigs.cwiseProduct(x));
    }
    const DenoiseResult res = denoise(q, cfg);
    for (int i = 0; i < 5; ++i) CHECK(res.theta[i] == q.gradients[i]);
  }
}

TEST_CASE("fdpg equals the closed form across random two-point instances") {
  Rng rng(59);
  SolverConfig cfg;
  cfg.max_iterations = 10000;
  cfg.stop_tolerance = 1e-12;
  int violated = 0;
  for (const int d : {1, 2, 3, 10}) {
    for (int trial = 0; trial < 50; ++trial) {
      const QuerySet q = test::random_query_set(rng, 2, d, 1.0, 2.0, 1.0);
      const auto [t1, t2] =
          coco2_closed_form(q.points[0], q.points[1], q.gradients[0], q.gradients[1], q.lipschitz);
      if (t1 != q.gradients[0]) ++violated;
      const DenoiseResult res = fdpg_solve(build_dual_problem(q), cfg);
      CHECK((res.theta[0] - t1).lpNorm<Eigen::Infinity>() <= 1e-6);
      CHECK((res.theta[1] - t2).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }
  CHECK(violated > 20);  // the sweep exercises both branches
}

TEST_CASE("QuerySet validation") {
  QuerySet q;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q.points = {vec({1.0})};
  q.gradients = {vec({1.0, 2.0})};
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q.gradients = {vec({1.0})};
  q.lipschitz = 0.0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q.lipschitz = 1.0;
  CHECK_NOTHROW(q.validate());
}
