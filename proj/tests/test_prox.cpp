#include "sqrtlasso/prox.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace sqrtlasso;

namespace {

Problem ones_problem() {
  Matrix x(2, 1);
  x << 1, 1;
  Vector y(2);
  y << 1, 1;
  return Problem{DenseMatrix{x}, y};
}

Problem random_problem(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = oracles::random_matrix(n, d, rng);
  Vector y = oracles::random_vector(n, rng);
  return Problem{DenseMatrix{x}, y};
}

}  // namespace

TEST_SUITE("prox") {

TEST_CASE("soft_threshold basics") {
  Vector x(3);
  x << 3, -2, 0.5;
  Vector out = soft_threshold(x, 1.0);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == -1.0);
  CHECK(out[2] == 0.0);

  CHECK(soft_threshold(x, 0.0).isApprox(x));

  Vector pair(2);
  pair << 1, -1;
  CHECK(soft_threshold(pair, 2.0).isZero());

  CHECK_THROWS_AS(soft_threshold(x, -0.1), std::invalid_argument);
}

TEST_CASE("soft_threshold is nonexpansive") {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 50; ++trial) {
    Vector a = oracles::random_vector(10, rng);
    Vector b = oracles::random_vector(10, rng);
    double t = std::abs(a[0]);
    CHECK((soft_threshold(a, t) - soft_threshold(b, t)).norm() <= (a - b).norm() + 1e-14);
  }
}

TEST_CASE("objective hand value and lambda linearity") {
  Problem p = ones_problem();
  Regularizer reg{1.2};
  CHECK(objective(p, LossKind::SqrtL2, reg, Vector::Zero(1)) == doctest::Approx(1.0).epsilon(1e-15));

  Vector theta(1);
  theta << 0.25;
  double f1 = objective(p, LossKind::SqrtL2, Regularizer{0.4}, theta);
  double f2 = objective(p, LossKind::SqrtL2, Regularizer{0.8}, theta);
  CHECK(f2 - f1 == doctest::Approx(0.4 * 0.25).epsilon(1e-12));

  CHECK_THROWS_AS(objective(p, LossKind::SqrtL2, Regularizer{0.0}, theta), std::invalid_argument);
  CHECK_THROWS_AS(objective(p, LossKind::SqrtL2, Regularizer{-1.0}, theta), std::invalid_argument);
}

TEST_CASE("prox_grad_step hand value") {
  // grad at 0 is [-1]; S_{0.5}(0 + 1) = [0.5]
  Problem p = ones_problem();
  Vector step = prox_grad_step(p, LossKind::SqrtL2, Regularizer{0.5}, Vector::Zero(1), 1.0);
  CHECK(step[0] == doctest::Approx(0.5).epsilon(1e-15));

  // full shrinkage when lambda dominates the scaled gradient step
  Vector zero_step = prox_grad_step(p, LossKind::SqrtL2, Regularizer{5.0}, Vector::Zero(1), 1.0);
  CHECK(zero_step.isZero());

  CHECK_THROWS_AS(prox_grad_step(p, LossKind::SqrtL2, Regularizer{0.5}, Vector::Zero(1), 0.0),
                  std::invalid_argument);
}

TEST_CASE("quadratic model at zero displacement is the objective") {
  Problem p = random_problem(12, 4, 202);
  std::mt19937_64 rng(203);
  Vector theta = oracles::random_vector(4, rng);
  Regularizer reg{0.3};
  double q = quadratic_model(p, LossKind::SqrtL2, reg, theta, theta, 2.5);
  CHECK(q == doctest::Approx(objective(p, LossKind::SqrtL2, reg, theta)).epsilon(1e-14));
}

TEST_CASE("quadratic model hand value on the 1-d instance") {
  // Q(0.5, 0; L=1) = 1 + (-1)(0.5) + 0.5(0.25) + 0.5(0.5) = 0.875
  Problem p = ones_problem();
  Vector theta_new(1), theta_old(1);
  theta_new << 0.5;
  theta_old << 0;
  double q = quadratic_model(p, LossKind::SqrtL2, Regularizer{0.5}, theta_new, theta_old, 1.0);
  CHECK(q == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("large step scale majorizes the objective at the prox step") {
  Problem p = random_problem(20, 6, 204);
  std::mt19937_64 rng(205);
  Vector theta = 0.2 * oracles::random_vector(6, rng);
  Regularizer reg{0.2};
  // L far above the curvature of the sqrt loss at this iterate
  const double l = 1e4;
  Vector step = prox_grad_step(p, LossKind::SqrtL2, reg, theta, l);
  double f_new = objective(p, LossKind::SqrtL2, reg, step);
  double q_new = quadratic_model(p, LossKind::SqrtL2, reg, step, theta, l);
  CHECK(f_new <= q_new + 1e-12);
}

TEST_CASE("prox step minimizes the quadratic model") {
  Problem p = random_problem(15, 5, 206);
  std::mt19937_64 rng(207);
  Vector theta = 0.3 * oracles::random_vector(5, rng);
  Regularizer reg{0.25};
  const double l = 3.0;
  Vector step = prox_grad_step(p, LossKind::SqrtL2, reg, theta, l);
  double q_star = quadratic_model(p, LossKind::SqrtL2, reg, step, theta, l);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector delta = 0.1 * oracles::random_vector(5, rng);
    double q = quadratic_model(p, LossKind::SqrtL2, reg, Vector(step + delta), theta, l);
    CHECK(q >= q_star - 1e-12);
  }
}

TEST_CASE("kkt residual hand values") {
  Problem p = ones_problem();
  // lambda below |grad|: residual is the shrunk magnitude
  CHECK(kkt_residual(p, LossKind::SqrtL2, Regularizer{0.5}, Vector::Zero(1)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  // lambda above |grad| at theta = 0: the subgradient absorbs the gradient
  CHECK(kkt_residual(p, LossKind::SqrtL2, Regularizer{1.2}, Vector::Zero(1)) ==
        0.0);
}

TEST_CASE("kkt residual vanishes at a brute-force minimizer") {
  for (Index d : {Index(1), Index(2)}) {
    Problem p = random_problem(12, d, 208 + d);
    Vector g0 = gradient(p, LossKind::SqrtL2, eval(p, LossKind::SqrtL2, Vector::Zero(d)));
    // half the null-fit boundary, so the solution has an active coordinate
    Regularizer reg{0.5 * g0.lpNorm<Eigen::Infinity>()};
    auto f = [&](const Vector& th) { return objective(p, LossKind::SqrtL2, reg, th); };
    double bound = f(Vector::Zero(d)) / reg.lambda + 0.5;
    oracles::BruteForceResult best = oracles::brute_force_min(f, d, bound);
    // the residual is discontinuous at theta_j = 0, so snap coordinates the
    // search left at its resolution floor before evaluating
    for (Index j = 0; j < d; ++j)
      if (std::abs(best.theta[j]) < 1e-9) best.theta[j] = 0.0;
    CHECK(kkt_residual(p, LossKind::SqrtL2, reg, best.theta) < 1e-6);
    // and it is strictly positive away from the minimizer
    Vector off = best.theta;
    off[0] += 0.05;
    CHECK(kkt_residual(p, LossKind::SqrtL2, reg, off) > 1e-3);
  }
}

TEST_CASE("kkt residual equals the subdifferential enumeration") {
  // omega = min over g in the l1 subdifferential of ||grad + lambda g||_inf;
  // enumerate g_j over a grid on [-1, 1] for the zero coordinates.
  Problem p = random_problem(10, 3, 210);
  std::mt19937_64 rng(211);
  Regularizer reg{0.35};
  Vector theta(3);
  theta << 0.4, 0.0, -0.2;
  Vector grad = gradient(p, LossKind::SqrtL2, eval(p, LossKind::SqrtL2, theta));

  const int grid = 401;
  double best = std::numeric_limits<double>::infinity();
  for (int gi = 0; gi < grid; ++gi) {
    Vector g(3);
    g[0] = 1.0;  // sign(0.4)
    g[1] = -1.0 + 2.0 * gi / (grid - 1);
    g[2] = -1.0;  // sign(-0.2)
    best = std::min(best, (grad + reg.lambda * g).lpNorm<Eigen::Infinity>());
  }
  double closed = kkt_residual_from_grad(grad, theta, reg.lambda);
  CHECK(closed <= best + 1e-12);
  CHECK(best <= closed + reg.lambda * 2.0 / (grid - 1) + 1e-12);
}

TEST_CASE("gradient-level helpers match the full-evaluation forms") {
  Problem p = random_problem(14, 4, 212);
  std::mt19937_64 rng(213);
  Vector theta = 0.2 * oracles::random_vector(4, rng);
  Regularizer reg{0.3};
  LossState s = eval(p, LossKind::SqrtL2, theta);
  Vector grad = gradient(p, LossKind::SqrtL2, s);

  Vector a = prox_grad_step(p, LossKind::SqrtL2, reg, theta, 2.0);
  Vector b = prox_step_from_grad(theta, grad, reg.lambda, 2.0);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);

  Vector target = 0.5 * oracles::random_vector(4, rng);
  double qa = quadratic_model(p, LossKind::SqrtL2, reg, target, theta, 2.0);
  double qb = quadratic_model_from_grad(s.loss_value, grad, target, theta, reg.lambda, 2.0);
  CHECK(qa == doctest::Approx(qb).epsilon(1e-15));

  CHECK(kkt_residual(p, LossKind::SqrtL2, reg, theta) ==
        doctest::Approx(kkt_residual_from_grad(grad, theta, reg.lambda)).epsilon(1e-15));
}

}  // TEST_SUITE
