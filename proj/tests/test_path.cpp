#include "sqrtlasso/path.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace sqrtlasso;

namespace {

Problem ones_problem() {
  Matrix x(2, 1);
  x << 1, 1;
  Vector y(2);
  y << 1, 1;
  return Problem{DenseMatrix{x}, y};
}

// Planted sparse signal with moderate noise; lambda_zero is comfortably above
// the default target sqrt(log d / n).
Problem planted_problem(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = oracles::random_matrix(n, d, rng);
  Vector theta = Vector::Zero(d);
  theta[0] = 3;
  theta[1] = -2;
  theta[3] = 1.5;
  Vector y = x * theta + 0.5 * oracles::random_vector(n, rng);
  return Problem{DenseMatrix{x}, y};
}

}  // namespace

TEST_SUITE("path") {

TEST_CASE("lambda_zero hand value and corner cases") {
  CHECK(lambda_zero(ones_problem()) == doctest::Approx(1.0).epsilon(1e-15));

  // response orthogonal to the single column: gradient at 0 vanishes
  Matrix x(2, 1);
  x << 1, 1;
  Vector y(2);
  y << 1, -1;
  CHECK(lambda_zero(Problem{DenseMatrix{x}, y}) == 0.0);

  CHECK_THROWS_AS(lambda_zero(Problem{DenseMatrix{x}, Vector::Zero(2)}), ZeroResponseError);
}

TEST_CASE("zero is a certified optimum at lambda_zero") {
  Problem p = planted_problem(40, 15, 501);
  double l0 = lambda_zero(p);
  CHECK(kkt_residual(p, LossKind::SqrtL2, Regularizer{l0}, Vector::Zero(15)) ==
        0.0);
  // and strictly positive just below it
  CHECK(kkt_residual(p, LossKind::SqrtL2, Regularizer{0.99 * l0}, Vector::Zero(15)) > 0);
}

TEST_CASE("lambda_grid geometric values") {
  auto g = lambda_grid(1.0, 0.01, 2);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(g[2] == 0.01);

  auto single = lambda_grid(2.0, 1.8, 1);
  REQUIRE(single.size() == 2);
  CHECK(single[1] == 1.8);

  auto g3 = lambda_grid(1.0, 0.001, 3);
  REQUIRE(g3.size() == 4);
  CHECK(g3[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(g3[2] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(g3[3] == 0.001);

  // endpoint is clamped exactly, not just approximately
  auto g7 = lambda_grid(0.83, 0.0917, 7);
  CHECK(g7.back() == 0.0917);

  CHECK_THROWS_AS(lambda_grid(1.0, 2.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(lambda_grid(1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("default stage count keeps the ratio at or above 0.9") {
  // ceil(log 2 / log(10/9)) = 7
  CHECK(default_n_stages(1.0, 0.5) == 7);
  CHECK(default_n_stages(1.0, 1e-300) == 200);
  for (double target : {0.7, 0.3, 0.05, 0.01}) {
    Index n = default_n_stages(1.0, target);
    if (n < 200) CHECK(std::pow(target, 1.0 / double(n)) >= 0.9 - 1e-12);
  }
}

TEST_CASE("path bookkeeping on a planted instance") {
  Problem p = planted_problem(60, 30, 502);
  PathConfig cfg;
  cfg.eps_final = 1e-8;
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);

  const std::size_t n_stages = res.stage_results.size();
  REQUIRE(res.lambdas.size() == n_stages + 1);
  CHECK(res.lambdas.front() == doctest::Approx(lambda_zero(p)).epsilon(1e-14));

  // strictly decreasing geometric grid with the advertised ratio
  for (std::size_t k = 1; k < res.lambdas.size(); ++k) {
    CHECK(res.lambdas[k] < res.lambdas[k - 1]);
    CHECK(std::abs(res.lambdas[k] - res.eta_lambda * res.lambdas[k - 1]) <=
          1e-12 * res.lambdas.front());
  }
  CHECK(res.lambdas.back() ==
        doctest::Approx(std::sqrt(std::log(30.0) / 60.0)).epsilon(1e-14));

  Index total = 0;
  for (std::size_t k = 0; k < n_stages; ++k) {
    const SolveResult& r = res.stage_results[k];
    CHECK(r.status == SolveStatus::Converged);
    double stage_eps = (k + 1 < n_stages) ? res.lambdas[k + 1] / 4.0 : cfg.eps_final;
    CHECK(r.omega <= stage_eps);
    total += r.iterations;
  }
  CHECK(res.total_inner_iterations == total);

  // minimal MSE matches a recomputation over the stage solutions
  double mse = std::numeric_limits<double>::infinity();
  for (const auto& r : res.stage_results)
    mse = std::min(mse, (p.y - p.x.mat() * r.theta_hat).squaredNorm() / double(p.n()));
  CHECK(res.minimal_mse == doctest::Approx(mse).epsilon(1e-14));
  CHECK(res.min_scaled_residual >= p.smooth_floor);
}

TEST_CASE("stages warm start from the previous solution") {
  Problem p = planted_problem(50, 20, 503);
  PathConfig cfg;
  cfg.keep_iterates = true;
  cfg.n_stages = 5;
  cfg.lambda_target = 0.4 * lambda_zero(p);
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  REQUIRE(res.stage_results.size() == 5);
  CHECK(res.stage_results[0].iterates.front().isZero());
  for (std::size_t k = 1; k < 5; ++k)
    CHECK(res.stage_results[k].iterates.front().isApprox(res.stage_results[k - 1].theta_hat, 0));
}

TEST_CASE("warm starts carry at most half the new lambda in KKT residual") {
  // With the grid ratio >= 0.9 and quarter-lambda stage tolerances, each
  // stage starts within lambda/2 of optimal for its own lambda.
  Problem p = planted_problem(60, 30, 504);
  PathConfig cfg;
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  Vector prev = Vector::Zero(30);
  for (std::size_t k = 0; k < res.stage_results.size(); ++k) {
    double lam = res.lambdas[k + 1];
    CHECK(kkt_residual(p, LossKind::SqrtL2, Regularizer{lam}, prev) <= lam / 2 + 1e-12);
    prev = res.stage_results[k].theta_hat;
  }
}

TEST_CASE("final-eps rule applies the final tolerance everywhere") {
  Problem p = planted_problem(40, 15, 505);
  PathConfig cfg;
  cfg.intermediate_eps_rule = EpsRule::FinalEps;
  cfg.eps_final = 1e-7;
  cfg.n_stages = 4;
  cfg.lambda_target = 0.3 * lambda_zero(p);
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  for (const auto& r : res.stage_results) CHECK(r.omega <= 1e-7);
}

TEST_CASE("single-stage path is one cold solve at the target") {
  Problem p = planted_problem(40, 15, 506);
  PathConfig cfg;
  cfg.n_stages = 1;
  cfg.lambda_target = 0.5 * lambda_zero(p);
  cfg.keep_iterates = true;
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  REQUIRE(res.stage_results.size() == 1);
  REQUIRE(res.lambdas.size() == 2);
  CHECK(res.stage_results[0].iterates.front().isZero());
}

TEST_CASE("target at or above lambda_zero collapses to the null fit") {
  Problem p = planted_problem(40, 15, 507);
  PathConfig cfg;
  cfg.lambda_target = 1.5 * lambda_zero(p);
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  REQUIRE(res.lambdas.size() == 1);
  CHECK(res.lambdas[0] == cfg.lambda_target);
  REQUIRE(res.stage_results.size() == 1);
  CHECK(res.stage_results[0].theta_hat.isZero());
  CHECK(res.stage_results[0].omega == 0.0);
}

TEST_CASE("overfitting target aborts the path excluding the failed stage") {
  // d = n, so some small lambda wants to interpolate; prox-GD then walks into
  // the nonsmooth region and the path must stop there.
  std::mt19937_64 rng(508);
  Matrix x = oracles::random_matrix(8, 8, rng);
  Vector y = oracles::random_vector(8, rng);
  Problem p{DenseMatrix{x}, y};
  PathConfig cfg;
  cfg.algo = PathAlgo::Gd;
  cfg.lambda_target = 1e-6 * lambda_zero(p);
  cfg.n_stages = 40;
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  CHECK(res.status == SolveStatus::NonsmoothStop);
  REQUIRE(res.failed_stage >= 1);
  CHECK(Index(res.stage_results.size()) == res.failed_stage - 1);
  CHECK(res.min_scaled_residual >= p.smooth_floor);
}

TEST_CASE("a stage that exhausts its budget aborts the path including the stage") {
  Problem p = planted_problem(40, 15, 509);
  PathConfig cfg;
  cfg.algo = PathAlgo::Gd;
  cfg.stage_max_iter = 1;
  cfg.eps_final = 1e-12;
  cfg.n_stages = 3;
  cfg.lambda_target = 0.2 * lambda_zero(p);
  cfg.intermediate_eps_rule = EpsRule::FinalEps;
  PathResult res = solve_path(p, LossKind::SqrtL2, cfg);
  CHECK(res.status == SolveStatus::MaxIter);
  CHECK(res.failed_stage == 1);
  CHECK(res.stage_results.size() == 1);
}

TEST_CASE("least squares paths run under gd only") {
  Problem p = planted_problem(40, 15, 510);
  PathConfig cfg;
  cfg.algo = PathAlgo::Gd;
  cfg.eps_final = 1e-8;
  cfg.lambda_target = 0.1;
  PathResult res = solve_path(p, LossKind::LeastSquares, cfg);
  REQUIRE(res.status == SolveStatus::Converged);
  CHECK(kkt_residual(p, LossKind::LeastSquares, Regularizer{0.1},
                     res.stage_results.back().theta_hat) <= 1e-8);
  // the null boundary for the squared loss is ||2 X^T y / n||_inf
  double expect0 = (2.0 / p.n()) * (p.x.mat().transpose() * p.y).lpNorm<Eigen::Infinity>();
  CHECK(res.lambdas.front() == doctest::Approx(expect0).epsilon(1e-14));

  cfg.algo = PathAlgo::Newton;
  CHECK_THROWS_AS(solve_path(p, LossKind::LeastSquares, cfg), std::invalid_argument);
}

TEST_CASE("config validation") {
  Problem p = planted_problem(20, 8, 511);
  PathConfig cfg;
  cfg.eps_final = 0;
  CHECK_THROWS_AS(solve_path(p, LossKind::SqrtL2, cfg), std::invalid_argument);
}

}  // TEST_SUITE
