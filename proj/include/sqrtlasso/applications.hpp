#pragma once

#include "sqrtlasso/path.hpp"

namespace sqrtlasso {

// Prox of t*||.||_2: scales the row by max(1 - t/||row||, 0); zero row stays zero.
Vector group_soft_threshold(const Vector& row, double t);

// Calibrated multivariate regression: (1/sqrt(n)) sum_k ||Y_k - X Theta_k||_2
// + lambda sum_j ||Theta_{j*}||_2, solved by pathwise prox-gradient with the
// row-wise group prox. Adapts to per-task noise levels through the per-task
// residual normalization.
struct CmrResult {
  Matrix theta_mat;  // d x m
  double omega = std::numeric_limits<double>::quiet_NaN();  // group KKT residual
  double objective = std::numeric_limits<double>::quiet_NaN();
  Index iterations = 0;  // prox-gradient steps summed over stages
  SolveStatus status = SolveStatus::Converged;
  int failed_task = -1;  // offending response column on NonsmoothStop
  // Objective after each accepted step, one series per stage (each series
  // starts at the stage's warm-start objective and is non-increasing).
  std::vector<std::vector<double>> stage_objectives;
};
CmrResult solve_cmr(const DenseMatrix& x, const Matrix& y_mat, double lambda_target,
                    const PathConfig& path_cfg);

// Plug-in noise level ||y - X theta_hat||_2 / sqrt(n).
double estimate_sigma(const Problem& problem, const Vector& theta_hat);

// Node-wise sparse precision estimation: regress each standardized column on
// the rest, omega_jj = 1/sigma_j^2, omega_kj = -theta_k^(j)/sigma_j^2, map back
// through the column scales, average-symmetrize. An off-diagonal entry is kept
// only when both directed estimates are nonzero (min-magnitude rule), so the
// support is exactly the nonzero pattern of omega.
struct PrecisionEstimate {
  Matrix omega;  // d x d, symmetric, positive diagonal
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support;
  std::vector<Index> failed_columns;  // columns left at the diagonal-only fallback
};
PrecisionEstimate estimate_precision(const DenseMatrix& data, double lambda_target,
                                     const PathConfig& path_cfg, int jobs = 0);

}  // namespace sqrtlasso
