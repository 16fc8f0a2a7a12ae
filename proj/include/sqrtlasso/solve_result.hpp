#pragma once

#include "sqrtlasso/core.hpp"

#include <limits>
#include <vector>

namespace sqrtlasso {

enum class SolveStatus { Converged, MaxIter, NonsmoothStop, LineSearchFail };

const char* to_string(SolveStatus status);

struct TraceRecord {
  Index iter;
  double objective;
  double omega;
  double residual_norm;
  double step;  // GD: accepted step scale L^(t); Newton: accepted eta_t
  Index nnz;
};

struct SolveResult {
  Vector theta_hat;
  double omega = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  Index iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  std::vector<TraceRecord> trace;  // per accepted iterate, when cfg.trace
  std::vector<Vector> iterates;    // accepted iterates, when cfg.keep_iterates
  // Smallest ||r||_2/sqrt(n) seen over theta0 and all accepted iterates;
  // stays well above smooth_floor whenever lambda is large enough.
  double min_scaled_residual = std::numeric_limits<double>::infinity();
};

inline Index count_nonzeros(const Vector& v) {
  Index nnz = 0;
  for (Index j = 0; j < v.size(); ++j) nnz += (v[j] != 0.0);
  return nnz;
}

}  // namespace sqrtlasso
