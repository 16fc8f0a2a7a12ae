#include "sqrtlasso/applications.hpp"
#include "sqrtlasso/datagen.hpp"
#include "sqrtlasso/io.hpp"
#include "sqrtlasso/path.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace sqrtlasso;

// Exit codes: 0 ok, 1 usage, 2 nonsmooth stop, 3 non-convergence/partial, 4 I/O.
int status_exit(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return 0;
    case SolveStatus::NonsmoothStop:
      return 2;
    default:
      return 3;
  }
}

std::uint64_t resolve_seed(std::uint64_t cli_seed) {
  if (const char* env = std::getenv("SQRTLASSO_SEED"))
    return std::strtoull(env, nullptr, 10);
  return cli_seed;
}

std::string version_string() { return std::string("sqrtlasso ") + kVersion; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

LossKind parse_loss(const std::string& name) {
  if (name == "sqrt") return LossKind::SqrtL2;
  if (name == "ls") return LossKind::LeastSquares;
  throw std::invalid_argument("unknown loss '" + name + "' (expected sqrt or ls)");
}

PathAlgo parse_algo(const std::string& name) {
  if (name == "gd") return PathAlgo::Gd;
  if (name == "newton") return PathAlgo::Newton;
  throw std::invalid_argument("unknown algo '" + name + "' (expected gd or newton)");
}

EpsRule parse_eps_rule(const std::string& name) {
  if (name == "quarter-lambda") return EpsRule::QuarterLambda;
  if (name == "final-eps") return EpsRule::FinalEps;
  throw std::invalid_argument("unknown eps rule '" + name +
                              "' (expected quarter-lambda or final-eps)");
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string s;
  for (const TraceRecord& r : trace) {
    s += std::to_string(r.iter) + ',' + format_double(r.objective) + ',' +
         format_double(r.omega) + ',' + format_double(r.residual_norm) + ',' +
         std::to_string(r.nnz) + '\n';
  }
  return s;
}

Problem load_problem(const std::string& x_path, const std::string& y_path) {
  Matrix x = read_csv_matrix(x_path);
  Vector y = read_csv_vector(y_path);
  return Problem(DenseMatrix(std::move(x)), std::move(y));
}

double default_target(Index n, Index d) {
  return std::sqrt(std::log(static_cast<double>(d)) / static_cast<double>(n));
}

struct GenArgs {
  Index n = 200, d = 2000, s = 3;
  double sigma = 0.5, rho = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  GenSpec spec;
  spec.n = a.n;
  spec.d = a.d;
  spec.s_star = a.s;
  spec.sigma = a.sigma;
  spec.rho = a.rho;
  spec.seed = resolve_seed(a.seed);
  Dataset data = generate(spec);

  ensure_dir(a.out);
  write_csv(join(a.out, "X.csv"), data.x.mat());
  write_csv(join(a.out, "y.csv"), data.y);
  write_csv(join(a.out, "theta_star.csv"), data.theta_star);

  Json meta;
  meta["n"] = spec.n;
  meta["d"] = spec.d;
  meta["s_star"] = spec.s_star;
  meta["sigma"] = spec.sigma;
  meta["rho"] = spec.rho;
  meta["seed"] = spec.seed;
  Json theta = Json::object();
  for (Index j = 0; j < data.theta_star.size(); ++j)
    if (data.theta_star[j] != 0.0) theta[std::to_string(j)] = data.theta_star[j];
  meta["theta_star"] = std::move(theta);
  write_text(join(a.out, "meta.json"), meta.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "gen";
  manifest.config = {{"n", std::to_string(a.n)},         {"d", std::to_string(a.d)},
                     {"s", std::to_string(a.s)},         {"sigma", format_double(a.sigma)},
                     {"rho", format_double(a.rho)},      {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(spec.seed);
  manifest.artifacts = {"X.csv", "y.csv", "theta_star.csv", "meta.json"};
  manifest.versions = version_string();
  write_manifest(a.out, manifest);
  return 0;
}

struct SolveArgs {
  std::string x_path, y_path;
  double lambda = 0;
  std::string algo = "newton", loss = "sqrt";
  double eps = 1e-6;
  Index max_iter = 0;
  bool trace = false;
  std::string out = ".";
  std::uint64_t seed = 0;
};

int cmd_solve(const SolveArgs& a) {
  Problem problem = load_problem(a.x_path, a.y_path);
  LossKind kind = parse_loss(a.loss);
  PathAlgo algo = parse_algo(a.algo);

  SolveResult res;
  if (algo == PathAlgo::Newton) {
    if (kind != LossKind::SqrtL2)
      throw std::invalid_argument("--algo newton supports only --loss sqrt");
    NewtonConfig cfg;
    cfg.lambda = a.lambda;
    cfg.eps = a.eps;
    if (a.max_iter > 0) cfg.max_outer = a.max_iter;
    cfg.trace = a.trace;
    res = solve_newton(problem, cfg, Vector::Zero(problem.d()));
  } else {
    GdConfig cfg;
    cfg.lambda = a.lambda;
    cfg.eps = a.eps;
    if (a.max_iter > 0) cfg.max_iter = a.max_iter;
    cfg.trace = a.trace;
    res = solve_gd(problem, kind, cfg, Vector::Zero(problem.d()));
  }

  ensure_dir(a.out);
  double sigma_hat = estimate_sigma(problem, res.theta_hat);
  write_text(join(a.out, "result.json"), result_to_json(res, sigma_hat).dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "solve";
  manifest.config = {{"x", a.x_path},
                     {"y", a.y_path},
                     {"lambda", format_double(a.lambda)},
                     {"algo", a.algo},
                     {"loss", a.loss},
                     {"eps", format_double(a.eps)},
                     {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(resolve_seed(a.seed));
  manifest.artifacts = {"result.json"};
  if (a.trace) {
    write_text(join(a.out, "trace.csv"), trace_csv(res.trace));
    manifest.artifacts.push_back("trace.csv");
  }
  manifest.versions = version_string();
  write_manifest(a.out, manifest);

  std::cerr << "status " << to_string(res.status) << ", " << res.iterations
            << " iterations, objective " << res.objective << "\n";
  return status_exit(res.status);
}

struct PathArgs {
  std::string x_path, y_path;
  Index n_stages = 0;
  double lambda_target = 0;
  double eps = 1e-6;
  std::string algo = "newton", loss = "sqrt", eps_rule = "quarter-lambda";
  bool trace = false;
  std::string out = ".";
  std::uint64_t seed = 0;
};

int cmd_path(const PathArgs& a) {
  Problem problem = load_problem(a.x_path, a.y_path);
  PathConfig cfg;
  cfg.n_stages = a.n_stages;
  cfg.lambda_target = a.lambda_target;
  cfg.eps_final = a.eps;
  cfg.algo = parse_algo(a.algo);
  cfg.intermediate_eps_rule = parse_eps_rule(a.eps_rule);
  cfg.trace = a.trace;
  PathResult res = solve_path(problem, parse_loss(a.loss), cfg);

  ensure_dir(a.out);
  write_text(join(a.out, "path.json"), path_to_json(res, problem).dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "path";
  manifest.config = {{"x", a.x_path},
                     {"y", a.y_path},
                     {"n-stages", std::to_string(a.n_stages)},
                     {"lambda-target", format_double(a.lambda_target)},
                     {"eps", format_double(a.eps)},
                     {"algo", a.algo},
                     {"loss", a.loss},
                     {"eps-rule", a.eps_rule},
                     {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(resolve_seed(a.seed));
  manifest.artifacts = {"path.json"};
  if (a.trace) {
    for (std::size_t k = 0; k < res.stage_results.size(); ++k) {
      std::string name = "trace_stage_" + std::to_string(k + 1) + ".csv";
      write_text(join(a.out, name), trace_csv(res.stage_results[k].trace));
      manifest.artifacts.push_back(name);
    }
  }
  manifest.versions = version_string();
  write_manifest(a.out, manifest);

  std::cerr << "status " << to_string(res.status) << ", "
            << res.stage_results.size() << " stages, minimal mse " << res.minimal_mse
            << "\n";
  return status_exit(res.status);
}

struct BenchArgs {
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::string algo = "newton";
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  if (!(a.scale > 0)) throw std::invalid_argument("--scale must be positive");
  const Index n = std::max<Index>(static_cast<Index>(std::lround(200 * a.scale)), 4);
  const Index d = std::max<Index>(static_cast<Index>(std::lround(2000 * a.scale)), 4);
  const std::uint64_t seed = resolve_seed(a.seed);
  const double sigmas[] = {0.1, 0.5, 1.0, 2.0};
  const Index stage_counts[] = {1, 10, 30};
  const double eps_values[] = {1e-4, 1e-5, 1e-6};

  ensure_dir(a.out);
  std::string csv;
  for (double sigma : sigmas) {
    GenSpec spec;
    spec.n = n;
    spec.d = d;
    spec.sigma = sigma;
    spec.seed = seed;
    Dataset data = generate(spec);
    Problem problem(data.x, data.y);
    for (Index n_stages : stage_counts) {
      for (double eps : eps_values) {
        PathConfig cfg;
        cfg.n_stages = n_stages;
        cfg.lambda_target = default_target(n, d);
        cfg.eps_final = eps;
        cfg.algo = parse_algo(a.algo);
        auto t0 = std::chrono::steady_clock::now();
        PathResult res = solve_path(problem, LossKind::SqrtL2, cfg);
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        csv += format_double(sigma) + ',' + std::to_string(n_stages) + ',' +
               format_double(eps) + ',' + std::to_string(res.total_inner_iterations) +
               ',' + format_double(dt.count()) + ',' + format_double(res.minimal_mse) +
               '\n';
      }
    }
  }
  write_text(join(a.out, "bench.csv"), csv);

  RunManifest manifest;
  manifest.command = "bench";
  manifest.config = {{"scale", format_double(a.scale)}, {"algo", a.algo}, {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(seed);
  manifest.artifacts = {"bench.csv"};
  manifest.versions = version_string();
  write_manifest(a.out, manifest);
  return 0;
}

struct GraphArgs {
  std::string data_path;
  double lambda_target = 0;
  double target_sparsity = 0;
  double eps = 1e-6;
  int jobs = 0;
  std::string out;
  std::uint64_t seed = 0;
};

double graph_sparsity(const PrecisionEstimate& est) {
  const Index d = est.omega.rows();
  Index edges = 0;
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k)
      if (est.support(k, j)) ++edges;
  return static_cast<double>(edges) / (static_cast<double>(d) * (d - 1) / 2.0);
}

int cmd_graph(const GraphArgs& a) {
  Matrix data = read_csv_matrix(a.data_path);
  const Index n = data.rows(), d = data.cols();
  DenseMatrix design(std::move(data));
  PathConfig cfg;
  cfg.eps_final = a.eps;

  double lambda = a.lambda_target > 0 ? a.lambda_target : default_target(n, d);
  PrecisionEstimate est;
  bool hit_target = true;
  if (a.target_sparsity <= 0) {
    est = estimate_precision(design, lambda, cfg, a.jobs);
  } else {
    // Sparsity decreases in lambda; bisect in log-lambda until the achieved
    // edge fraction lands within 20% of the request.
    double lo = lambda / 256.0, hi = lambda * 16.0;
    hit_target = false;
    for (int it = 0; it < 24 && !hit_target; ++it) {
      double mid = std::sqrt(lo * hi);
      est = estimate_precision(design, mid, cfg, a.jobs);
      double s = graph_sparsity(est);
      if (std::abs(s - a.target_sparsity) <= 0.2 * a.target_sparsity) {
        lambda = mid;
        hit_target = true;
      } else if (s > a.target_sparsity) {
        lo = mid;  // too dense: raise lambda
      } else {
        hi = mid;
      }
    }
  }

  ensure_dir(a.out);
  write_csv(join(a.out, "omega.csv"), est.omega);
  std::string edges;
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k)
      if (est.support(k, j)) edges += std::to_string(j) + ',' + std::to_string(k) + '\n';
  write_text(join(a.out, "edges.csv"), edges);

  RunManifest manifest;
  manifest.command = "graph";
  manifest.config = {{"data", a.data_path},
                     {"lambda-target", format_double(lambda)},
                     {"target-sparsity", format_double(a.target_sparsity)},
                     {"eps", format_double(a.eps)},
                     {"jobs", std::to_string(a.jobs)},
                     {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(resolve_seed(a.seed));
  manifest.artifacts = {"omega.csv", "edges.csv"};
  manifest.versions = version_string();
  write_manifest(a.out, manifest);

  for (Index j : est.failed_columns)
    std::cerr << "column " << j << " failed; kept at diagonal fallback\n";
  double ok_fraction =
      1.0 - static_cast<double>(est.failed_columns.size()) / static_cast<double>(d);
  std::cerr << "sparsity " << graph_sparsity(est) << ", " << est.failed_columns.size()
            << " failed columns\n";
  if (ok_fraction < 0.9 || !hit_target) return 3;
  return 0;
}

struct CmrArgs {
  std::string x_path, y_path;
  double lambda = 0;
  double eps = 1e-6;
  Index n_stages = 0;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_cmr(const CmrArgs& a) {
  Matrix x = read_csv_matrix(a.x_path);
  Matrix y_mat = read_csv_matrix(a.y_path);
  const Index n = x.rows(), d = x.cols(), m = y_mat.cols();
  DenseMatrix design(std::move(x));

  // sigma-free default; the log(m)/n term accounts for the extra tasks.
  double lambda = a.lambda > 0
                      ? a.lambda
                      : std::sqrt((std::log(static_cast<double>(d)) +
                                   std::log(static_cast<double>(m))) /
                                  static_cast<double>(n));
  PathConfig cfg;
  cfg.eps_final = a.eps;
  cfg.n_stages = a.n_stages;
  CmrResult res = solve_cmr(design, y_mat, lambda, cfg);

  ensure_dir(a.out);
  write_csv(join(a.out, "theta_mat.csv"), res.theta_mat);
  std::string support;
  for (Index j = 0; j < res.theta_mat.rows(); ++j)
    if (res.theta_mat.row(j).norm() > 0) support += std::to_string(j) + '\n';
  write_text(join(a.out, "row_support.csv"), support);

  RunManifest manifest;
  manifest.command = "cmr";
  manifest.config = {{"x", a.x_path},
                     {"y", a.y_path},
                     {"lambda", format_double(lambda)},
                     {"eps", format_double(a.eps)},
                     {"n-stages", std::to_string(a.n_stages)},
                     {"out", a.out}};
  manifest.seed = static_cast<std::int64_t>(resolve_seed(a.seed));
  manifest.artifacts = {"theta_mat.csv", "row_support.csv"};
  manifest.versions = version_string();
  write_manifest(a.out, manifest);

  if (res.status == SolveStatus::NonsmoothStop)
    std::cerr << "nonsmooth stop in task " << res.failed_task << "\n";
  return status_exit(res.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SQRT-Lasso solvers, pathwise optimization, and applications"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic regression data");
  gen->add_option("--n", gen_args.n, "sample size");
  gen->add_option("--d", gen_args.d, "dimension");
  gen->add_option("--s", gen_args.s, "number of nonzero coefficients");
  gen->add_option("--sigma", gen_args.sigma, "noise level");
  gen->add_option("--rho", gen_args.rho, "design equicorrelation");
  gen->add_option("--seed", gen_args.seed, "rng seed");
  gen->add_option("--out", gen_args.out, "output directory")->required();

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "single solve at a fixed lambda");
  solve->add_option("--x", solve_args.x_path, "design csv")->required();
  solve->add_option("--y", solve_args.y_path, "response csv")->required();
  solve->add_option("--lambda", solve_args.lambda, "penalty level")
      ->required()
      ->check(CLI::PositiveNumber);
  solve->add_option("--algo", solve_args.algo, "gd or newton");
  solve->add_option("--loss", solve_args.loss, "sqrt or ls");
  solve->add_option("--eps", solve_args.eps, "kkt tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iteration budget");
  solve->add_flag("--trace", solve_args.trace, "write trace.csv");
  solve->add_option("--out", solve_args.out, "output directory");
  solve->add_option("--seed", solve_args.seed, "recorded in the manifest");

  PathArgs path_args;
  CLI::App* path = app.add_subcommand("path", "pathwise solve over a lambda grid");
  path->add_option("--x", path_args.x_path, "design csv")->required();
  path->add_option("--y", path_args.y_path, "response csv")->required();
  path->add_option("--n-stages", path_args.n_stages, "grid stages (0 = auto)");
  path->add_option("--lambda-target", path_args.lambda_target,
                   "final lambda (0 = sqrt(log(d)/n))");
  path->add_option("--eps", path_args.eps, "final-stage kkt tolerance");
  path->add_option("--algo", path_args.algo, "gd or newton");
  path->add_option("--loss", path_args.loss, "sqrt or ls");
  path->add_option("--eps-rule", path_args.eps_rule, "quarter-lambda or final-eps");
  path->add_flag("--trace", path_args.trace, "write per-stage trace csvs");
  path->add_option("--out", path_args.out, "output directory");
  path->add_option("--seed", path_args.seed, "recorded in the manifest");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "sigma x stages x eps sweep");
  bench->add_option("--scale", bench_args.scale, "problem size multiplier");
  bench->add_option("--seed", bench_args.seed, "rng seed");
  bench->add_option("--algo", bench_args.algo, "gd or newton");
  bench->add_option("--out", bench_args.out, "output directory")->required();

  GraphArgs graph_args;
  CLI::App* graph = app.add_subcommand("graph", "sparse precision matrix estimation");
  graph->add_option("--data", graph_args.data_path, "observation csv (n x d)")->required();
  graph->add_option("--lambda-target", graph_args.lambda_target,
                    "final lambda (0 = sqrt(log(d)/n))");
  graph->add_option("--target-sparsity", graph_args.target_sparsity,
                    "bisect lambda for this edge fraction");
  graph->add_option("--eps", graph_args.eps, "final-stage kkt tolerance");
  graph->add_option("--jobs", graph_args.jobs, "worker threads (0 = hardware)");
  graph->add_option("--out", graph_args.out, "output directory")->required();
  graph->add_option("--seed", graph_args.seed, "recorded in the manifest");

  CmrArgs cmr_args;
  CLI::App* cmr = app.add_subcommand("cmr", "calibrated multivariate regression");
  cmr->add_option("--x", cmr_args.x_path, "design csv")->required();
  cmr->add_option("--y", cmr_args.y_path, "response csv (n x m)")->required();
  cmr->add_option("--lambda", cmr_args.lambda,
                  "penalty (0 = sqrt((log d + log m)/n))");
  cmr->add_option("--eps", cmr_args.eps, "final-stage kkt tolerance");
  cmr->add_option("--n-stages", cmr_args.n_stages, "grid stages (0 = auto)");
  cmr->add_option("--out", cmr_args.out, "output directory")->required();
  cmr->add_option("--seed", cmr_args.seed, "recorded in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (path->parsed()) return cmd_path(path_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (graph->parsed()) return cmd_graph(graph_args);
    if (cmr->parsed()) return cmd_cmr(cmr_args);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ZeroResponseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
