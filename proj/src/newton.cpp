#include "sqrtlasso/newton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sqrtlasso {

namespace {

void check_config(const NewtonConfig& cfg) {
  if (!(cfg.lambda > 0) || !std::isfinite(cfg.lambda))
    throw std::invalid_argument("solve_newton: lambda must be positive and finite");
  if (!(cfg.eps > 0)) throw std::invalid_argument("solve_newton: eps must be positive");
  if (!(cfg.alpha > 0 && cfg.alpha < 0.5))
    throw std::invalid_argument("solve_newton: alpha must lie in (0, 0.5)");
  if (!(cfg.mu > 0 && cfg.mu < 1))
    throw std::invalid_argument("solve_newton: mu must lie in (0, 1)");
  if (cfg.max_outer < 1) throw std::invalid_argument("solve_newton: max_outer must be >= 1");
}

double resolved_sub_tol(const NewtonConfig& cfg) {
  return cfg.sub_tol > 0 ? cfg.sub_tol : std::min(1e-8, 0.1 * cfg.eps);
}

double scalar_soft(double v, double t) {
  double shrunk = std::abs(v) - t;
  return shrunk > 0 ? (v > 0 ? shrunk : -shrunk) : 0.0;
}

// Coordinate descent with an active-set strategy on the l1-penalized quadratic
// model around theta_t. xc is a column-major copy of the design so coordinate
// columns are contiguous. Maintains z = X*dtheta and s = w^T dtheta
// incrementally; both are rebuilt every 1000 accepted updates to bound drift.
//
// q_floor guards against model unboundedness: the deflation w w^T leaves zero
// curvature along directions with X*d parallel to the residual, and when the
// design can interpolate, the model's linear term can beat the l1 growth
// there, so exact minimization diverges. The objective itself is nonnegative,
// so a model value below -(F at theta_t) promises more decrease than exists;
// past that point we stop and hand the (still descending) direction to the
// outer line search.
Vector subproblem_cd(const Eigen::MatrixXd& xc, const Vector& g0, const HessianFactors& hf,
                     const Vector& theta_t, double lambda, double sub_tol, Index max_sweeps,
                     double q_floor) {
  const Index n = xc.rows();
  const Index d = xc.cols();

  // Ridge for coordinates whose column is nearly parallel to the residual:
  // there the deflated curvature c(||x_j||^2 - w_j^2) collapses to ~0.
  Vector h = hf.diag;
  for (Index j = 0; j < d; ++j) {
    double col_scale = hf.diag[j] + hf.c * hf.w[j] * hf.w[j];  // c * ||x_j||^2
    if (h[j] <= 1e-12 * col_scale) h[j] += 1e-10 * col_scale;
  }

  Vector theta = theta_t;
  Vector dvec = Vector::Zero(d);
  Vector z = Vector::Zero(n);
  double s = 0.0;
  long updates = 0;

  auto update_coord = [&](Index j) -> double {
    double gj = g0[j] + hf.c * (xc.col(j).dot(z) - hf.w[j] * s);
    // h[j] == 0 only for an all-zero column; then only the penalty acts.
    double fresh = h[j] > 0 ? scalar_soft(theta[j] - gj / h[j], lambda / h[j]) : 0.0;
    double delta = fresh - theta[j];
    if (delta != 0.0) {
      z += xc.col(j) * delta;
      s += hf.w[j] * delta;
      theta[j] = fresh;
      dvec[j] += delta;
      if (++updates >= 1000) {
        z.noalias() = xc * dvec;
        s = hf.w.dot(dvec);
        updates = 0;
      }
    }
    return std::abs(delta);
  };

  const double l1_t = theta_t.lpNorm<1>();
  auto model_value = [&]() {
    return g0.dot(dvec) + 0.5 * hf.c * (z.squaredNorm() - s * s) +
           lambda * (theta.lpNorm<1>() - l1_t);
  };

  std::vector<Index> active;
  for (Index round = 0; round < max_sweeps; ++round) {
    for (Index j = 0; j < d; ++j) update_coord(j);
    if (model_value() < q_floor) return theta;

    // Subproblem KKT over all coordinates; also the violator detector.
    Vector g_full = g0 + hf.c * (xc.transpose() * z - hf.w * s);
    if (kkt_residual_from_grad(g_full, theta, lambda) <= sub_tol) break;

    active.clear();
    for (Index j = 0; j < d; ++j) {
      bool violates = theta[j] == 0.0 && std::abs(g_full[j]) - lambda > sub_tol;
      if (theta[j] != 0.0 || violates) active.push_back(j);
    }
    for (Index sweep = 0; sweep < max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (Index j : active) max_change = std::max(max_change, update_coord(j));
      if (max_change <= sub_tol || model_value() < q_floor) break;
    }
  }
  return theta;
}

}  // namespace

Vector solve_subproblem(const Problem& problem, const Regularizer& reg, const LossState& state,
                        const Vector& theta_t, const NewtonConfig& cfg) {
  if (theta_t.size() != problem.d())
    throw std::invalid_argument("solve_subproblem: theta_t length mismatch");
  Eigen::MatrixXd xc = problem.x.mat();
  Vector g0 = gradient(problem, LossKind::SqrtL2, state);
  HessianFactors hf = hessian_diag_and_deflation(problem, state);
  double q_floor = -(state.loss_value + reg.lambda * theta_t.lpNorm<1>());
  return subproblem_cd(xc, g0, hf, theta_t, reg.lambda, resolved_sub_tol(cfg), cfg.max_sweeps,
                       q_floor);
}

SolveResult solve_newton(const Problem& problem, const NewtonConfig& cfg, const Vector& theta0) {
  check_config(cfg);
  if (theta0.size() != problem.d())
    throw std::invalid_argument("solve_newton: theta0 length mismatch");
  const double lambda = cfg.lambda;
  const double sub_tol = resolved_sub_tol(cfg);

  SolveResult res;
  res.theta_hat = theta0;

  LossState state;
  try {
    state = eval(problem, LossKind::SqrtL2, theta0);
  } catch (const NonsmoothRegionError& e) {
    res.status = SolveStatus::NonsmoothStop;
    res.min_scaled_residual = e.scaled_residual;
    return res;
  }
  res.min_scaled_residual = state.residual_norm / problem.sqrt_n;

  Eigen::MatrixXd xc = problem.x.mat();  // column-major copy for the CD sweeps
  Vector grad = gradient(problem, LossKind::SqrtL2, state);
  double F = state.loss_value + lambda * theta0.lpNorm<1>();
  double omega = kkt_residual_from_grad(grad, theta0, lambda);

  auto push_trace = [&](Index it, double eta) {
    if (cfg.trace)
      res.trace.push_back(
          {it, F, omega, state.residual_norm, eta, count_nonzeros(res.theta_hat)});
    if (cfg.keep_iterates) res.iterates.push_back(res.theta_hat);
  };
  push_trace(0, 0.0);

  res.status = SolveStatus::MaxIter;
  if (omega <= cfg.eps) res.status = SolveStatus::Converged;

  for (Index t = 1; t <= cfg.max_outer && res.status == SolveStatus::MaxIter; ++t) {
    HessianFactors hf;
    try {
      hf = hessian_diag_and_deflation(problem, state);
    } catch (const NonsmoothRegionError&) {
      res.status = SolveStatus::NonsmoothStop;
      break;
    }
    Vector theta_half =
        subproblem_cd(xc, grad, hf, res.theta_hat, lambda, sub_tol, cfg.max_sweeps, -F);
    Vector dtheta = theta_half - res.theta_hat;
    if (dtheta.lpNorm<Eigen::Infinity>() == 0.0) break;  // no usable direction: stay MaxIter

    double gamma = grad.dot(dtheta) +
                   lambda * (theta_half.lpNorm<1>() - res.theta_hat.lpNorm<1>());

    bool accepted = false;
    double eta = 1.0;
    Vector cand;
    LossState cand_state;
    double f_cand = 0;
    try {
      for (int q = 0; q <= cfg.max_backtracks; ++q) {
        eta = std::pow(cfg.mu, q);
        cand = res.theta_hat + eta * dtheta;
        cand_state = eval(problem, LossKind::SqrtL2, cand);
        f_cand = cand_state.loss_value + lambda * cand.lpNorm<1>();
        if (f_cand <= F + cfg.alpha * eta * gamma) {
          accepted = true;
          break;
        }
      }
    } catch (const NonsmoothRegionError&) {
      res.status = SolveStatus::NonsmoothStop;
      break;
    }
    if (!accepted) {
      res.status = SolveStatus::LineSearchFail;
      break;
    }

    res.theta_hat = std::move(cand);
    state = std::move(cand_state);
    F = f_cand;
    res.iterations = t;
    res.min_scaled_residual =
        std::min(res.min_scaled_residual, state.residual_norm / problem.sqrt_n);

    grad = gradient(problem, LossKind::SqrtL2, state);
    omega = kkt_residual_from_grad(grad, res.theta_hat, lambda);
    push_trace(t, eta);
    if (omega <= cfg.eps) res.status = SolveStatus::Converged;
  }

  res.omega = omega;
  res.objective = F;
  return res;
}

}  // namespace sqrtlasso
