#pragma once

#include "sqrtlasso/gd.hpp"
#include "sqrtlasso/newton.hpp"

#include <vector>

namespace sqrtlasso {

enum class PathAlgo { Gd, Newton };

// Tolerance for intermediate stages K < N: QuarterLambda uses lambda_[K]/4
// (the final eps applies only to the last stage), FinalEps applies the final
// eps to every stage.
enum class EpsRule { QuarterLambda, FinalEps };

struct PathConfig {
  Index n_stages = 0;          // 0 = ceil(log(lambda0/target)/log(10/9)), capped at 200
  double lambda_target = 0.0;  // 0 = sqrt(log(d)/n)
  double eps_final = 1e-6;
  PathAlgo algo = PathAlgo::Newton;
  EpsRule intermediate_eps_rule = EpsRule::QuarterLambda;
  Index stage_max_iter = 0;    // per-stage iteration budget; 0 = solver default
  bool trace = false;
  bool keep_iterates = false;
};

struct PathResult {
  std::vector<double> lambdas;             // grid lambda_[0..N], strictly decreasing
  std::vector<SolveResult> stage_results;  // stages 1..N
  double eta_lambda = 1.0;
  double minimal_mse = std::numeric_limits<double>::infinity();  // min_K ||y - X theta_[K]||^2/n
  Index total_inner_iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  Index failed_stage = -1;  // stage index whose solver did not converge, -1 if none
  double min_scaled_residual = std::numeric_limits<double>::infinity();
};

// Smallest lambda whose solution is exactly zero: ||X^T y / (sqrt(n)||y||)||_inf.
double lambda_zero(const Problem& problem);

// Geometric grid lambda_[K] = lambda0 * eta^K with eta = (target/lambda0)^(1/n),
// last entry clamped to target exactly. Requires 0 < target < lambda0.
std::vector<double> lambda_grid(double lambda0, double lambda_target, Index n);

// ceil(log(lambda0/target)/log(10/9)) capped at 200; keeps eta >= 0.9.
Index default_n_stages(double lambda0, double lambda_target);

// Warm-started stages K = 1..N at lambda_[K], initializer theta_[K-1]
// (theta_[0] = 0). A stage that fails to converge aborts the path; the partial
// result through the previous stage is returned with failed_stage set.
PathResult solve_path(const Problem& problem, LossKind kind, const PathConfig& cfg);

}  // namespace sqrtlasso
