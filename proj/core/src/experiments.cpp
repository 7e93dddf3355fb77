#include "coco/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "coco/denoiser.hpp"
#include "coco/errors.hpp"
#include "coco/mc.hpp"
#include "coco/optim.hpp"
#include "coco/oracles.hpp"
#include "coco/parallel.hpp"
#include "coco/svg.hpp"

namespace coco {

namespace {

void add_provenance(ResultTable& table, const ExperimentConfig& cfg) {
  table.add_provenance(std::string("coco-experiments ") + kVersion);
  table.add_provenance("config: " + cfg.canonical());
  std::ostringstream hash;
  hash << "config_hash: 0x" << std::hex << cfg.hash();
  table.add_provenance(hash.str());
}

QuadraticObjective quadratic_from(const ExperimentConfig& cfg) {
  return QuadraticObjective::linspaced(static_cast<int>(cfg.integer("d")), cfg.num("eig_min"),
                                       cfg.num("eig_max"));
}

SolverConfig solver_from(const ExperimentConfig& cfg) {
  SolverConfig solver;
  solver.max_iterations = static_cast<int>(cfg.integer("coco_max_iter"));
  solver.stop_tolerance = cfg.num("coco_tol");
  return solver;
}

std::vector<Vector> sample_cube(Rng& rng, int count, int dim, double half_width) {
  std::vector<Vector> points(count);
  for (auto& x : points) {
    x.resize(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform_in(-half_width, half_width);
  }
  return points;
}

std::vector<ExperimentOutput> denoise_once(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("d"));
  const int k = static_cast<int>(cfg.integer("k"));
  const QuadraticObjective obj = quadratic_from(cfg);
  const double lipschitz = obj.lipschitz_real() + cfg.num("delta_l");
  if (!(lipschitz > 0.0))
    throw ConfigError("config key 'delta_l': denoiser constant eig_max + delta_l must be > 0");

  Rng rng(derive_seed(cfg.seed(), 0));
  QuerySet q;
  q.points = sample_cube(rng, k, d, cfg.num("l"));
  q.lipschitz = lipschitz;
  const NoiseModel noise{cfg.num("sigma")};
  std::vector<Vector> truths(k);
  q.gradients.resize(k);
  for (int i = 0; i < k; ++i) {
    truths[i] = obj.gradient(q.points[i]);
    q.gradients[i] = noisy_query(q.points[i], truths[i], noise, rng).g;
  }

  const DenoiseResult res = denoise(q, solver_from(cfg));

  ResultTable table({{"point", "1"}, {"oracle_error", "1"}, {"coco_error", "1"}});
  add_provenance(table, cfg);
  table.add_provenance("feasibility: " + format_double(res.feasibility));
  table.add_provenance("iterations: " + std::to_string(res.iterations));
  for (int i = 0; i < k; ++i)
    table.append({static_cast<double>(i + 1), (q.gradients[i] - truths[i]).norm(),
                  (res.theta[i] - truths[i]).norm()});

  ResultTable trace({{"iteration", "1"}, {"dual_objective", "1"}});
  add_provenance(trace, cfg);
  for (std::size_t i = 0; i < res.dual_objective.size(); ++i)
    trace.append({static_cast<double>(i), res.dual_objective[i]});

  return {{"denoise_once", std::move(table), {}}, {"denoise_once_trace", std::move(trace), {}}};
}

std::vector<ExperimentOutput> mse_vs_sigma(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("d"));
  const auto sigmas = cfg.num_list("sigmas");
  std::vector<int> ks;
  for (const double k : cfg.num_list("ks")) {
    if (k < 1 || k != std::floor(k))
      throw ConfigError("config key 'ks': window sizes must be positive integers here");
    ks.push_back(static_cast<int>(k));
  }
  const int k_max = *std::max_element(ks.begin(), ks.end());
  const long long n = cfg.integer("n");
  const QuadraticObjective obj = quadratic_from(cfg);
  const SolverConfig solver = solver_from(cfg);

  Rng point_rng(derive_seed(cfg.seed(), 0));
  const std::vector<Vector> points = sample_cube(point_rng, k_max, d, cfg.num("l"));
  std::vector<Vector> truths(k_max);
  for (int i = 0; i < k_max; ++i) truths[i] = obj.gradient(points[i]);

  // rows indexed [sigma][k]; replications share noise draws across window
  // sizes (common random numbers)
  std::vector<std::vector<McEstimate>> cells(sigmas.size(), std::vector<McEstimate>(ks.size()));
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const double sigma = sigmas[si];
    std::vector<std::vector<double>> values(n, std::vector<double>(ks.size()));
    parallel_for(n, [&](long long r) {
      Rng rng(derive_seed(derive_seed(cfg.seed(), 101 + si), static_cast<std::uint64_t>(r)));
      std::vector<Vector> noisy(k_max);
      for (int i = 0; i < k_max; ++i) {
        noisy[i] = truths[i];
        for (int j = 0; j < d; ++j) noisy[i][j] += sigma * rng.normal();
      }
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        QuerySet q;
        q.points.assign(points.begin(), points.begin() + ks[ki]);
        q.gradients.assign(noisy.begin(), noisy.begin() + ks[ki]);
        q.lipschitz = obj.lipschitz_real();
        const DenoiseResult res = denoise(q, solver);
        double total = 0.0;
        for (int i = 0; i < ks[ki]; ++i) total += (res.theta[i] - truths[i]).squaredNorm();
        values[r][ki] = total / ks[ki];
      }
    });
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      McAccumulator acc;
      for (long long r = 0; r < n; ++r) acc.add(values[r][ki]);
      cells[si][ki] = acc.estimate();
    }
  }

  ResultTable table(
      {{"sigma2", "1"}, {"k", "1"}, {"mse_hat", "1"}, {"se", "1"}, {"slope", "1"}});
  add_provenance(table, cfg);
  std::vector<double> sigma2(sigmas.size());
  for (std::size_t si = 0; si < sigmas.size(); ++si) sigma2[si] = sigmas[si] * sigmas[si];
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    std::vector<double> mse(sigmas.size());
    for (std::size_t si = 0; si < sigmas.size(); ++si) mse[si] = cells[si][ki].mean;
    const double slope = slope_through_origin(sigma2, mse);
    for (std::size_t si = 0; si < sigmas.size(); ++si)
      table.append({sigma2[si], static_cast<double>(ks[ki]), cells[si][ki].mean,
                    cells[si][ki].se, slope});
  }
  return {{"mse_vs_sigma", std::move(table), {}}};
}

std::vector<ExperimentOutput> mse_elementwise(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("d"));
  const int k = static_cast<int>(cfg.integer("k"));
  const long long n = cfg.integer("n");
  const double sigma = cfg.num("sigma");
  const QuadraticObjective obj = quadratic_from(cfg);
  const SolverConfig solver = solver_from(cfg);

  Rng point_rng(derive_seed(cfg.seed(), 0));
  QuerySet base;
  base.points = sample_cube(point_rng, k, d, cfg.num("l"));
  base.lipschitz = obj.lipschitz_real();
  std::vector<Vector> truths(k);
  for (int i = 0; i < k; ++i) truths[i] = obj.gradient(base.points[i]);

  std::vector<std::vector<Vector>> coco_est(n), oracle_est(n);
  parallel_for(n, [&](long long r) {
    Rng rng(derive_seed(derive_seed(cfg.seed(), 11), static_cast<std::uint64_t>(r)));
    QuerySet q = base;
    q.gradients.resize(k);
    for (int i = 0; i < k; ++i) {
      q.gradients[i] = truths[i];
      for (int j = 0; j < d; ++j) q.gradients[i][j] += sigma * rng.normal();
    }
    oracle_est[r] = q.gradients;
    coco_est[r] = denoise(q, solver).theta;
  });

  const MseReport coco_mse = mse_estimate(coco_est, truths);
  const MseReport oracle_mse = mse_estimate(oracle_est, truths);

  ResultTable table({{"point", "1"},
                     {"mse_coco", "1"},
                     {"mse_oracle_emp", "1"},
                     {"mse_oracle_theory", "1"}});
  add_provenance(table, cfg);
  table.add_provenance("stacked_mse_coco: " + format_double(coco_mse.stacked.mean));
  table.add_provenance("stacked_mse_oracle: " + format_double(oracle_mse.stacked.mean));
  for (int i = 0; i < k; ++i)
    table.append({static_cast<double>(i + 1), coco_mse.per_point[i].mean,
                  oracle_mse.per_point[i].mean, d * sigma * sigma});
  return {{"mse_elementwise", std::move(table), {}}};
}

std::vector<ExperimentOutput> tightness(const ExperimentConfig& cfg) {
  const auto dxs = cfg.num_list("dxs");
  const auto dls = cfg.num_list("dls");
  const long long n = cfg.integer("n");
  const double sigma = cfg.num("sigma");
  const double l_real = cfg.num("lipschitz_real");
  if (!(sigma > 0.0)) throw ConfigError("config key 'sigma': must be > 0 here");

  struct Cell {
    TightnessQuery query;
    double p_theory = 0.0;
    McEstimate p_hat;
  };
  std::vector<Cell> cells;
  for (const double dl : dls)
    for (const double dx : dxs)
      cells.push_back({{dx, l_real * dx, l_real + dl, sigma}, 0.0, {}});

  parallel_for(static_cast<long long>(cells.size()), [&](long long i) {
    Rng rng(derive_seed(cfg.seed(), static_cast<std::uint64_t>(i)));
    cells[i].p_theory = p_active_theoretical(cells[i].query);
    cells[i].p_hat = p_active_empirical(cells[i].query, n, rng);
  });

  ResultTable table(
      {{"dx", "1"}, {"dl", "1"}, {"p_theory", "1"}, {"p_hat", "1"}, {"se", "1"}});
  add_provenance(table, cfg);
  std::size_t i = 0;
  for (const double dl : dls)
    for (const double dx : dxs) {
      table.append({dx, dl, cells[i].p_theory, cells[i].p_hat.mean, cells[i].p_hat.se});
      ++i;
    }
  return {{"tightness", std::move(table), {}}};
}

std::vector<ExperimentOutput> optimize(const ExperimentConfig& cfg) {
  const auto algorithms = cfg.str_list("algorithms");
  std::vector<int> ks;
  for (const double k : cfg.num_list("ks")) {
    if (k < 0 || k != std::floor(k))
      throw ConfigError("config key 'ks': entries must be nonnegative integers");
    ks.push_back(static_cast<int>(k));
  }
  const long long budget = cfg.integer("budget");
  const long long runs = cfg.integer("runs");
  const long long record_every = cfg.integer("record_every");

  std::optional<GradientOracle> oracle;
  Vector x0;
  if (cfg.str("objective") == "quadratic") {
    for (const auto& algorithm : algorithms)
      if (algorithm == "strsaga")
        throw ConfigError("config key 'algorithms': strsaga requires objective=logistic");
    QuadraticObjective obj = quadratic_from(cfg);
    const int d = obj.dim();
    x0 = Vector::Constant(d, cfg.num("x0_norm") / std::sqrt(static_cast<double>(d)));
    oracle.emplace(std::move(obj), NoiseModel{cfg.num("sigma")});
  } else {
    LogisticObjective obj = parse_libsvm_file(cfg.str("dataset"), cfg.num("lambda"));
    Vector x_star = logistic_minimizer_cached(obj, cfg.str("dataset"));
    x0 = Vector::Zero(obj.dim());
    oracle.emplace(std::move(obj), std::move(x_star));
  }

  SolverConfig solver = solver_from(cfg);
  solver.warm_start = cfg.flag("warm");

  ResultTable table({{"algorithm", "name"},
                     {"k", "1"},
                     {"oracle_calls", "calls"},
                     {"dist_mean", "1"},
                     {"dist_se", "1"}});
  add_provenance(table, cfg);

  for (const auto& algorithm : algorithms) {
    OptimizerSpec spec;
    spec.gamma = cfg.num("gamma");
    if (algorithm == "sgd" || algorithm == "sgd_pr") {
      spec.algorithm = Algorithm::Sgd;
      spec.decreasing = cfg.str("schedule") == "decreasing";
      spec.schedule_c = cfg.num("schedule_c");
      spec.polyak_ruppert = algorithm == "sgd_pr";
    } else if (algorithm == "adam") {
      spec.algorithm = Algorithm::Adam;
    } else {
      spec.algorithm = Algorithm::Strsaga;
    }

    for (const int k : ks) {
      // a window of one is the identity filter, so k=1 is the plain baseline
      const std::optional<CocoSpec> coco = CocoSpec{k, solver};

      std::vector<std::vector<double>> dist(runs);
      std::vector<char> diverged(runs, 0);
      parallel_for(runs, [&](long long r) {
        const Trajectory traj = run_optimizer(*oracle, spec, coco, x0, budget,
                                              derive_seed(cfg.seed(), static_cast<std::uint64_t>(r)));
        diverged[r] = traj.diverged ? 1 : 0;
        if (traj.diverged) return;
        dist[r].resize(traj.points.size());
        for (std::size_t i = 0; i < traj.points.size(); ++i)
          dist[r][i] = traj.points[i].distance;
      });

      long long diverged_count = 0;
      for (const char flag : diverged) diverged_count += flag;
      if (diverged_count > 0)
        table.add_provenance("diverged: algorithm=" + algorithm + " k=" + std::to_string(k) +
                             " runs=" + std::to_string(diverged_count));
      for (long long call = 0; call <= budget; ++call) {
        if (call % record_every != 0 && call != budget) continue;
        McAccumulator acc;
        for (long long r = 0; r < runs; ++r)
          if (!diverged[r]) acc.add(dist[r][call]);
        if (acc.count() == 0) continue;
        const McEstimate e = acc.estimate();
        table.append({algorithm, static_cast<double>(k), static_cast<double>(call), e.mean, e.se});
      }
    }
  }
  return {{"optimize", std::move(table), {}}};
}

std::vector<ExperimentOutput> warmstart_bench(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("d"));
  const int k_window = static_cast<int>(cfg.integer("k"));
  const long long budget = cfg.integer("budget");
  const long long burn_in = cfg.integer("burn_in");
  const QuadraticObjective obj = quadratic_from(cfg);
  const NoiseModel noise{cfg.num("sigma")};
  const SolverConfig solver = solver_from(cfg);

  Rng rng(derive_seed(cfg.seed(), 0));
  Vector x = Vector::Constant(d, cfg.num("x0_norm") / std::sqrt(static_cast<double>(d)));
  SgdState sgd{x, cfg.num("gamma")};

  std::deque<Vector> points, gradients;
  std::deque<std::int64_t> ids;
  std::int64_t next_id = 0;
  DualState prev_state;
  std::vector<PairKey> prev_keys;
  bool have_prev = false;

  ResultTable table({{"outer_step", "1"}, {"mode", "name"}, {"iterations", "1"}});
  add_provenance(table, cfg);
  long long warm_wins = 0, compared = 0;

  for (long long step = 1; step <= budget; ++step) {
    const Vector g = noisy_query(sgd.x, obj.gradient(sgd.x), noise, rng).g;
    points.push_back(sgd.x);
    gradients.push_back(g);
    ids.push_back(next_id++);
    if (static_cast<int>(points.size()) > k_window) {
      points.pop_front();
      gradients.pop_front();
      ids.pop_front();
    }

    QuerySet q;
    q.points.assign(points.begin(), points.end());
    q.gradients.assign(gradients.begin(), gradients.end());
    q.lipschitz = obj.lipschitz_real();

    Vector theta = g;
    if (points.size() >= 3 && !coalesce(q).merged_any()) {
      const DualProblem problem = build_dual_problem(q);
      const auto keys = pair_keys({ids.begin(), ids.end()});
      const DenoiseResult cold = fdpg_solve(problem, solver, nullptr);
      DualState init = have_prev ? shift_dual_blocks(prev_state, prev_keys, keys, d)
                                 : DualState::zero(problem.pair_count, d);
      const DenoiseResult warm = fdpg_solve(problem, solver, &init);
      table.append({static_cast<double>(step), std::string("cold"),
                    static_cast<double>(cold.iterations)});
      table.append({static_cast<double>(step), std::string("warm"),
                    static_cast<double>(warm.iterations)});
      if (step > burn_in) {
        ++compared;
        if (warm.iterations < cold.iterations) ++warm_wins;
      }
      theta = warm.theta.back();
      prev_state = warm.state;
      prev_keys = keys;
      have_prev = true;
    } else if (points.size() == 2) {
      const DenoiseResult res = denoise(q, solver);
      theta = res.theta.back();
      prev_state = res.state;
      prev_keys = pair_keys({ids.begin(), ids.end()});
      have_prev = !coalesce(q).merged_any();
    }
    sgd_step(sgd, theta);
  }

  table.add_provenance("warm_wins_after_burn_in: " + std::to_string(warm_wins) + "/" +
                       std::to_string(compared));
  return {{"warmstart_bench", std::move(table), {}}};
}

void maybe_write_svg(const ExperimentConfig& cfg, const ExperimentOutput& out,
                     const std::filesystem::path& dir) {
  if (!cfg.flag("svg")) return;
  SvgPlotSpec spec;
  spec.title = out.name;
  switch (cfg.kind()) {
    case ExperimentKind::DenoiseOnce:
      if (out.name != "denoise_once") return;
      spec.x = "point";
      spec.series = {{"oracle_error", "", ""}, {"coco_error", "", ""}};
      break;
    case ExperimentKind::MseVsSigma:
      spec.x = "sigma2";
      spec.series = {{"mse_hat", "se", "mse"}};
      spec.group_by = "k";
      break;
    case ExperimentKind::MseElementwise:
      spec.x = "point";
      spec.series = {{"mse_coco", "", ""}, {"mse_oracle_emp", "", ""},
                     {"mse_oracle_theory", "", ""}};
      break;
    case ExperimentKind::Tightness:
      spec.x = "dx";
      spec.series = {{"p_hat", "se", "empirical"}, {"p_theory", "", "theory"}};
      spec.group_by = "dl";
      break;
    case ExperimentKind::Optimize: {
      spec.x = "oracle_calls";
      spec.series = {{"dist_mean", "dist_se", "dist"}};
      spec.group_by = "k";
      spec.log_y = true;
      for (const auto& algorithm : cfg.str_list("algorithms")) {
        spec.filter = {{"algorithm", algorithm}};
        spec.title = out.name + " " + algorithm;
        write_svg_file((dir / (out.name + "_" + algorithm + ".svg")).string(), out.table, spec);
      }
      return;
    }
    case ExperimentKind::WarmstartBench:
      spec.x = "outer_step";
      spec.series = {{"iterations", "", ""}};
      spec.group_by = "mode";
      break;
  }
  write_svg_file((dir / (out.name + ".svg")).string(), out.table, spec);
}

}  // namespace

std::vector<ExperimentOutput> run_experiment(const ExperimentConfig& cfg) {
  std::vector<ExperimentOutput> outputs;
  switch (cfg.kind()) {
    case ExperimentKind::DenoiseOnce: outputs = denoise_once(cfg); break;
    case ExperimentKind::MseVsSigma: outputs = mse_vs_sigma(cfg); break;
    case ExperimentKind::MseElementwise: outputs = mse_elementwise(cfg); break;
    case ExperimentKind::Tightness: outputs = tightness(cfg); break;
    case ExperimentKind::Optimize: outputs = optimize(cfg); break;
    case ExperimentKind::WarmstartBench: outputs = warmstart_bench(cfg); break;
  }

  const std::filesystem::path dir(cfg.out_dir());
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory: " + dir.string());
  for (auto& out : outputs) {
    out.csv_path = dir / (out.name + ".csv");
    std::ofstream file(out.csv_path, std::ios::binary);
    if (!file) throw DataError("cannot write output file: " + out.csv_path.string());
    out.table.write_csv(file);
    maybe_write_svg(cfg, out, dir);
  }
  return outputs;
}

}  // namespace coco
