#include "sqrtlasso/applications.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sqrtlasso {

Vector group_soft_threshold(const Vector& row, double t) {
  if (t < 0) throw std::invalid_argument("group_soft_threshold: t must be >= 0");
  double nrm = row.norm();
  double scale = nrm > t ? 1.0 - t / nrm : 0.0;
  return scale * row;
}

namespace {

struct CmrEval {
  Matrix residual;   // n x m
  Vector res_norms;  // per-task ||r_k||
  double loss = 0.0;
};

// Per-task residuals with per-task floors; the offending column is named.
CmrEval cmr_eval(const DenseMatrix& x, const Matrix& y_mat, const Matrix& theta,
                 const Vector& floors, double sqrt_n) {
  CmrEval ev;
  ev.residual = y_mat - x.mat() * theta;
  const Index m = y_mat.cols();
  ev.res_norms.resize(m);
  for (Index k = 0; k < m; ++k) {
    double nrm = ev.residual.col(k).norm();
    if (nrm / sqrt_n < floors[k])
      throw NonsmoothRegionError(nrm / sqrt_n, static_cast<int>(k));
    ev.res_norms[k] = nrm;
  }
  ev.loss = ev.res_norms.sum() / sqrt_n;
  return ev;
}

// Column-wise concatenation of the per-task gradients -X^T r_k / (sqrt(n)||r_k||).
Matrix cmr_gradient(const DenseMatrix& x, const CmrEval& ev, double sqrt_n) {
  Matrix scaled = ev.residual.array().rowwise() / ev.res_norms.transpose().array();
  return -(x.mat().transpose() * scaled) / sqrt_n;
}

Matrix group_prox_rows(const Matrix& v, double t) {
  Matrix out(v.rows(), v.cols());
  for (Index j = 0; j < v.rows(); ++j) {
    double nrm = v.row(j).norm();
    double scale = nrm > t ? 1.0 - t / nrm : 0.0;
    out.row(j) = scale * v.row(j);
  }
  return out;
}

double row_norm_sum(const Matrix& theta) {
  double s = 0;
  for (Index j = 0; j < theta.rows(); ++j) s += theta.row(j).norm();
  return s;
}

// Row-wise analog of the KKT residual: distance of -grad row to the
// subdifferential of lambda*||.||_2 at the row.
double cmr_kkt(const Matrix& grad, const Matrix& theta, double lambda) {
  double w = 0;
  for (Index j = 0; j < theta.rows(); ++j) {
    double nrm = theta.row(j).norm();
    double rho = nrm > 0 ? (grad.row(j) + (lambda / nrm) * theta.row(j)).norm()
                         : std::max(grad.row(j).norm() - lambda, 0.0);
    w = std::max(w, rho);
  }
  return w;
}

double cmr_quadratic(double loss_old, const Matrix& grad, const Matrix& theta_new,
                     const Matrix& theta_old, double lambda, double l) {
  Matrix delta = theta_new - theta_old;
  return loss_old + grad.cwiseProduct(delta).sum() + 0.5 * l * delta.squaredNorm() +
         lambda * row_norm_sum(theta_new);
}

struct CmrStageOut {
  double omega = 0;
  double objective = 0;
  Index iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  int failed_task = -1;
  std::vector<double> objectives;  // warm-start value, then one per accepted step
};

// One fixed-lambda solve; same line-search discipline as the single-response
// prox-gradient solver, with the row-wise group prox in place of soft
// thresholding. theta is advanced in place and only ever holds accepted
// iterates.
CmrStageOut cmr_stage(const DenseMatrix& x, const Matrix& y_mat, const Vector& floors,
                      double lambda, double eps, Index max_iter, Matrix& theta) {
  const double sqrt_n = std::sqrt(static_cast<double>(x.rows()));
  const double l_max = 1e8, l_min = 1e-12;
  const int max_halvings = 64;

  CmrStageOut out;
  CmrEval ev = cmr_eval(x, y_mat, theta, floors, sqrt_n);
  Matrix grad = cmr_gradient(x, ev, sqrt_n);
  double F = ev.loss + lambda * row_norm_sum(theta);
  out.objectives.push_back(F);
  double omega = cmr_kkt(grad, theta, lambda);
  if ((theta.array() == 0.0).all()) {
    double gmax = 0;
    for (Index j = 0; j < grad.rows(); ++j) gmax = std::max(gmax, grad.row(j).norm());
    if (gmax <= lambda) omega = 0.0;
  }
  if (omega <= eps) {
    out.omega = omega;
    out.objective = F;
    return out;
  }

  double l_prev = 1.0;
  out.status = SolveStatus::MaxIter;
  for (Index t = 1; t <= max_iter; ++t) {
    Matrix theta_plus;
    CmrEval ev_plus;
    double f_plus = 0, q_plus = 0, l = 0;
    try {
      double l_try = l_prev;
      for (int h = 0;; ++h) {
        theta_plus = group_prox_rows(theta - grad / l_try, lambda / l_try);
        ev_plus = cmr_eval(x, y_mat, theta_plus, floors, sqrt_n);
        f_plus = ev_plus.loss + lambda * row_norm_sum(theta_plus);
        q_plus = cmr_quadratic(ev.loss, grad, theta_plus, theta, lambda, l_try);
        if (f_plus < q_plus && h < max_halvings && l_try / 2 >= l_min) {
          l_try /= 2;
          continue;
        }
        break;
      }
      l = std::min(2 * l_try, l_max);
      theta_plus = group_prox_rows(theta - grad / l, lambda / l);
      ev_plus = cmr_eval(x, y_mat, theta_plus, floors, sqrt_n);
      f_plus = ev_plus.loss + lambda * row_norm_sum(theta_plus);
      q_plus = cmr_quadratic(ev.loss, grad, theta_plus, theta, lambda, l);
      while (f_plus > q_plus + 1e-12 && l < l_max) {
        l = std::min(2 * l, l_max);
        theta_plus = group_prox_rows(theta - grad / l, lambda / l);
        ev_plus = cmr_eval(x, y_mat, theta_plus, floors, sqrt_n);
        f_plus = ev_plus.loss + lambda * row_norm_sum(theta_plus);
        q_plus = cmr_quadratic(ev.loss, grad, theta_plus, theta, lambda, l);
      }
    } catch (const NonsmoothRegionError& e) {
      out.status = SolveStatus::NonsmoothStop;
      out.failed_task = e.task;
      out.omega = omega;
      out.objective = F;
      return out;  // theta keeps the last accepted iterate
    }

    theta = std::move(theta_plus);
    ev = std::move(ev_plus);
    F = f_plus;
    out.objectives.push_back(F);
    l_prev = l;
    out.iterations = t;
    grad = cmr_gradient(x, ev, sqrt_n);
    omega = cmr_kkt(grad, theta, lambda);
    if (omega <= eps) {
      out.status = SolveStatus::Converged;
      break;
    }
  }
  out.omega = omega;
  out.objective = F;
  return out;
}

}  // namespace

CmrResult solve_cmr(const DenseMatrix& x, const Matrix& y_mat, double lambda_target,
                    const PathConfig& path_cfg) {
  const Index n = x.rows(), d = x.cols(), m = y_mat.cols();
  if (y_mat.rows() != n) throw std::invalid_argument("solve_cmr: response row count mismatch");
  if (m < 1) throw std::invalid_argument("solve_cmr: need at least one response column");
  if (!(lambda_target > 0) || !std::isfinite(lambda_target))
    throw std::invalid_argument("solve_cmr: lambda must be positive and finite");
  if (!(path_cfg.eps_final > 0))
    throw std::invalid_argument("solve_cmr: eps_final must be positive");
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  Vector floors(m);
  for (Index k = 0; k < m; ++k) floors[k] = 1e-8 * (y_mat.col(k).norm() / sqrt_n + 1.0);

  CmrResult out;
  out.theta_mat = Matrix::Zero(d, m);

  double lambda0 = 0;
  double loss0 = 0;
  try {
    CmrEval ev0 = cmr_eval(x, y_mat, out.theta_mat, floors, sqrt_n);
    loss0 = ev0.loss;
    Matrix g0 = cmr_gradient(x, ev0, sqrt_n);
    for (Index j = 0; j < d; ++j) lambda0 = std::max(lambda0, g0.row(j).norm());
  } catch (const NonsmoothRegionError& e) {
    out.status = SolveStatus::NonsmoothStop;
    out.failed_task = e.task;
    return out;
  }

  if (lambda_target >= lambda0) {
    out.omega = 0.0;
    out.objective = loss0;
    return out;
  }

  Index n_stages = path_cfg.n_stages > 0 ? path_cfg.n_stages
                                         : default_n_stages(lambda0, lambda_target);
  std::vector<double> grid = lambda_grid(lambda0, lambda_target, n_stages);
  Index stage_iters = path_cfg.stage_max_iter > 0 ? path_cfg.stage_max_iter : 10000;

  for (Index k = 1; k <= n_stages; ++k) {
    double lam = grid[static_cast<std::size_t>(k)];
    double eps =
        (k < n_stages && path_cfg.intermediate_eps_rule == EpsRule::QuarterLambda)
            ? lam / 4.0
            : path_cfg.eps_final;
    CmrStageOut st = cmr_stage(x, y_mat, floors, lam, eps, stage_iters, out.theta_mat);
    out.iterations += st.iterations;
    out.omega = st.omega;
    out.objective = st.objective;
    out.stage_objectives.push_back(std::move(st.objectives));
    if (st.status != SolveStatus::Converged) {
      out.status = st.status;
      out.failed_task = st.failed_task;
      return out;
    }
  }
  return out;
}

double estimate_sigma(const Problem& problem, const Vector& theta_hat) {
  if (theta_hat.size() != problem.d())
    throw std::invalid_argument("estimate_sigma: theta_hat length mismatch");
  return (problem.y - mat_vec(problem.x, theta_hat)).norm() / problem.sqrt_n;
}

PrecisionEstimate estimate_precision(const DenseMatrix& data, double lambda_target,
                                     const PathConfig& path_cfg, int jobs) {
  const Index n = data.rows(), d = data.cols();
  if (n < 2 || d < 2) throw std::invalid_argument("estimate_precision: need n >= 2 and d >= 2");
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  // Center each column and scale it to ||column|| = sqrt(n); remember the
  // scales to map the estimate back to the original variables.
  Matrix z = data.mat();
  Vector scale(d);
  for (Index j = 0; j < d; ++j) {
    z.col(j).array() -= z.col(j).mean();
    double nrm = z.col(j).norm();
    if (nrm > 0) {
      scale[j] = nrm / sqrt_n;
      z.col(j) /= scale[j];
    } else {
      scale[j] = 1.0;  // constant column; its regression fails downstream
    }
  }

  PathConfig cfg = path_cfg;
  cfg.lambda_target = lambda_target;
  cfg.trace = false;
  cfg.keep_iterates = false;

  Matrix omega_dir = Matrix::Zero(d, d);  // column j <- regression of column j
  std::vector<char> failed(static_cast<std::size_t>(d), 0);

  std::atomic<Index> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;

  auto worker = [&]() {
    for (;;) {
      Index j = next.fetch_add(1);
      if (j >= d) return;
      {
        std::lock_guard<std::mutex> g(err_mutex);
        if (err) return;
      }
      try {
        Matrix xj(n, d - 1);
        for (Index c = 0, col = 0; c < d; ++c)
          if (c != j) xj.col(col++) = z.col(c);
        Problem p(DenseMatrix(std::move(xj)), z.col(j));
        PathResult pr = solve_path(p, LossKind::SqrtL2, cfg);
        if (pr.status != SolveStatus::Converged || pr.stage_results.empty()) {
          failed[static_cast<std::size_t>(j)] = 1;
          continue;
        }
        const Vector& th = pr.stage_results.back().theta_hat;
        double inv_var = 1.0 / std::pow(estimate_sigma(p, th), 2);
        omega_dir(j, j) = inv_var;
        for (Index c = 0, col = 0; c < d; ++c)
          if (c != j) omega_dir(c, j) = -inv_var * th[col++];
      } catch (const ZeroResponseError&) {
        failed[static_cast<std::size_t>(j)] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  Index n_workers = jobs > 0 ? jobs : (hw > 0 ? static_cast<Index>(hw) : 1);
  n_workers = std::min<Index>(n_workers, d);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (Index w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);

  PrecisionEstimate out;
  for (Index j = 0; j < d; ++j)
    if (failed[static_cast<std::size_t>(j)]) {
      out.failed_columns.push_back(j);
      omega_dir(j, j) = 1.0;  // unit residual variance on the standardized scale
    }

  out.omega = (omega_dir + omega_dir.transpose()) / 2.0;
  out.support.setConstant(d, d, false);
  for (Index j = 0; j < d; ++j) out.support(j, j) = true;
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k) {
      // An edge survives only when both directed estimates are nonzero.
      if (omega_dir(k, j) != 0.0 && omega_dir(j, k) != 0.0) {
        out.support(k, j) = out.support(j, k) = true;
      } else {
        out.omega(k, j) = out.omega(j, k) = 0.0;
      }
    }
  for (Index j = 0; j < d; ++j)
    for (Index k = 0; k < d; ++k) out.omega(k, j) /= scale[k] * scale[j];
  return out;
}

}  // namespace sqrtlasso
