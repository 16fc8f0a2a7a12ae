#include "sqrtlasso/path.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrtlasso {

namespace {

// Null-fit boundary for either loss: ||grad at 0||_inf.
double null_lambda(const Problem& problem, LossKind kind) {
  if (kind == LossKind::SqrtL2) return lambda_zero(problem);
  return (2.0 / problem.n()) * mat_t_vec(problem.x, problem.y).lpNorm<Eigen::Infinity>();
}

double stage_mse(const Problem& problem, const Vector& theta) {
  return (problem.y - mat_vec(problem.x, theta)).squaredNorm() / problem.n();
}

SolveResult run_stage(const Problem& problem, LossKind kind, const PathConfig& cfg,
                      double lambda, double eps, const Vector& theta0) {
  if (cfg.algo == PathAlgo::Newton) {
    if (kind != LossKind::SqrtL2)
      throw std::invalid_argument("solve_path: Newton stages support only the SqrtL2 loss");
    NewtonConfig ncfg;
    ncfg.lambda = lambda;
    ncfg.eps = eps;
    if (cfg.stage_max_iter > 0) ncfg.max_outer = cfg.stage_max_iter;
    ncfg.trace = cfg.trace;
    ncfg.keep_iterates = cfg.keep_iterates;
    return solve_newton(problem, ncfg, theta0);
  }
  GdConfig gcfg;
  gcfg.lambda = lambda;
  gcfg.eps = eps;
  if (cfg.stage_max_iter > 0) gcfg.max_iter = cfg.stage_max_iter;
  gcfg.trace = cfg.trace;
  gcfg.keep_iterates = cfg.keep_iterates;
  return solve_gd(problem, kind, gcfg, theta0);
}

}  // namespace

double lambda_zero(const Problem& problem) {
  if (problem.y_norm == 0.0) throw ZeroResponseError();
  return mat_t_vec(problem.x, problem.y).lpNorm<Eigen::Infinity>() /
         (problem.sqrt_n * problem.y_norm);
}

std::vector<double> lambda_grid(double lambda0, double lambda_target, Index n) {
  if (!(lambda_target > 0) || !(lambda_target < lambda0))
    throw std::invalid_argument("lambda_grid: need 0 < lambda_target < lambda0");
  if (n < 1) throw std::invalid_argument("lambda_grid: need n >= 1");
  double eta = std::pow(lambda_target / lambda0, 1.0 / static_cast<double>(n));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  grid[0] = lambda0;
  for (Index k = 1; k <= n; ++k) grid[static_cast<std::size_t>(k)] = grid[k - 1] * eta;
  grid.back() = lambda_target;  // kill float drift at the endpoint
  return grid;
}

Index default_n_stages(double lambda0, double lambda_target) {
  if (!(lambda_target > 0) || !(lambda_target < lambda0))
    throw std::invalid_argument("default_n_stages: need 0 < lambda_target < lambda0");
  double raw = std::ceil(std::log(lambda0 / lambda_target) / std::log(10.0 / 9.0));
  return std::min<Index>(std::max<Index>(static_cast<Index>(raw), 1), 200);
}

PathResult solve_path(const Problem& problem, LossKind kind, const PathConfig& cfg) {
  if (!(cfg.eps_final > 0)) throw std::invalid_argument("solve_path: eps_final must be positive");
  double target = cfg.lambda_target > 0
                      ? cfg.lambda_target
                      : std::sqrt(std::log(static_cast<double>(problem.d())) / problem.n());
  if (!(target > 0) || !std::isfinite(target))
    throw std::invalid_argument("solve_path: lambda_target must be positive and finite");

  double lambda0 = null_lambda(problem, kind);
  PathResult out;

  // Target at or above the null-fit boundary: zero is already optimal there,
  // so the path collapses to the single requested lambda.
  if (target >= lambda0) {
    out.lambdas = {target};
    SolveResult r = run_stage(problem, kind, cfg, target, cfg.eps_final, Vector::Zero(problem.d()));
    out.total_inner_iterations = r.iterations;
    out.status = r.status;
    out.min_scaled_residual = r.min_scaled_residual;
    out.minimal_mse = stage_mse(problem, r.theta_hat);
    out.stage_results.push_back(std::move(r));
    return out;
  }

  Index n_stages =
      cfg.n_stages > 0 ? cfg.n_stages : default_n_stages(lambda0, target);
  out.lambdas = lambda_grid(lambda0, target, n_stages);
  out.eta_lambda = std::pow(target / lambda0, 1.0 / static_cast<double>(n_stages));

  Vector theta = Vector::Zero(problem.d());
  for (Index k = 1; k <= n_stages; ++k) {
    double lam = out.lambdas[static_cast<std::size_t>(k)];
    double eps = (k < n_stages && cfg.intermediate_eps_rule == EpsRule::QuarterLambda)
                     ? lam / 4.0
                     : cfg.eps_final;
    SolveResult r = run_stage(problem, kind, cfg, lam, eps, theta);
    out.total_inner_iterations += r.iterations;
    out.min_scaled_residual = std::min(out.min_scaled_residual, r.min_scaled_residual);

    if (r.status == SolveStatus::NonsmoothStop) {
      // The overfit region invalidates this and all later stages; report the
      // portion of the path that finished cleanly.
      out.status = SolveStatus::NonsmoothStop;
      out.failed_stage = k;
      return out;
    }

    out.minimal_mse = std::min(out.minimal_mse, stage_mse(problem, r.theta_hat));
    theta = r.theta_hat;
    bool converged = r.status == SolveStatus::Converged;
    out.stage_results.push_back(std::move(r));
    if (!converged) {
      out.status = out.stage_results.back().status;
      out.failed_stage = k;
      return out;
    }
  }
  return out;
}

}  // namespace sqrtlasso
