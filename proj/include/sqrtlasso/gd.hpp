#pragma once

#include "sqrtlasso/prox.hpp"
#include "sqrtlasso/solve_result.hpp"

namespace sqrtlasso {

struct GdConfig {
  double lambda = 0.1;
  double eps = 1e-6;        // KKT residual tolerance
  double l0 = 1.0;          // initial step scale L^(0)
  double l_max = 1e8;
  double l_min = 1e-12;
  Index max_iter = 10000;
  int max_halvings = 64;    // per-iteration cap on the downward L search
  bool trace = false;
  bool keep_iterates = false;
};

// Proximal gradient descent with a two-sided step-size search: L is halved
// while the objective still undershoots the quadratic model, the accepted
// scale is min(2 L~, l_max), and a doubling safeguard restores majorization
// before the iterate is accepted (keeps descent monotone).
SolveResult solve_gd(const Problem& problem, LossKind kind, const GdConfig& cfg,
                     const Vector& theta0);

}  // namespace sqrtlasso
