#pragma once

#include "sqrtlasso/prox.hpp"
#include "sqrtlasso/solve_result.hpp"

namespace sqrtlasso {

struct NewtonConfig {
  double lambda = 0.1;
  double eps = 1e-6;
  Index max_outer = 100;
  double mu = 0.9;           // backtracking ratio, eta = mu^q
  double alpha = 0.25;       // Armijo slope fraction, in (0, 0.5)
  double sub_tol = 0.0;      // subproblem KKT tolerance; 0 = min(1e-8, 0.1 eps)
  Index max_sweeps = 10000;  // coordinate sweeps per subproblem
  int max_backtracks = 100;  // mu^100 ~ 2.7e-5
  bool trace = false;
  bool keep_iterates = false;
};

// Minimizes the l1-penalized local quadratic model
//   grad^T (theta - theta_t) + 1/2 (theta - theta_t)^T H (theta - theta_t)
//   + lambda ||theta||_1
// with H = c (X^T X - w w^T) held implicitly, by coordinate descent over an
// active set. Returns theta^(t+0.5) with subproblem KKT residual <= sub_tol.
// Always warm-started at theta_t (zero step), so the model decrease is <= 0.
Vector solve_subproblem(const Problem& problem, const Regularizer& reg, const LossState& state,
                        const Vector& theta_t, const NewtonConfig& cfg);

// Proximal Newton on the sqrt-loss: subproblem step, gamma_t decrease check,
// and mu/alpha backtracking (smallest q >= 0 with eta = mu^q satisfying the
// Armijo condition). Terminates as soon as omega_lambda(theta) <= eps, so a
// theta0 that already satisfies the tolerance returns unchanged.
SolveResult solve_newton(const Problem& problem, const NewtonConfig& cfg, const Vector& theta0);

}  // namespace sqrtlasso
