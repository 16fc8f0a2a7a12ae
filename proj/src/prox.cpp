#include "sqrtlasso/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrtlasso {

namespace {

void check_reg(const Regularizer& reg) {
  if (!(reg.lambda > 0) || !std::isfinite(reg.lambda))
    throw std::invalid_argument("regularizer lambda must be positive and finite");
}

}  // namespace

Vector soft_threshold(const Vector& x, double t) {
  if (t < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return x.unaryExpr([t](double v) {
    double shrunk = std::abs(v) - t;
    return shrunk > 0 ? (v > 0 ? shrunk : -shrunk) : 0.0;
  });
}

double objective(const Problem& problem, LossKind kind, const Regularizer& reg,
                 const Vector& theta) {
  check_reg(reg);
  return eval(problem, kind, theta).loss_value + reg.lambda * theta.lpNorm<1>();
}

Vector prox_grad_step(const Problem& problem, LossKind kind, const Regularizer& reg,
                      const Vector& theta, double l) {
  check_reg(reg);
  if (!(l > 0)) throw std::invalid_argument("prox_grad_step: step scale must be positive");
  Vector grad = gradient(problem, kind, eval(problem, kind, theta));
  return prox_step_from_grad(theta, grad, reg.lambda, l);
}

double quadratic_model(const Problem& problem, LossKind kind, const Regularizer& reg,
                       const Vector& theta_new, const Vector& theta_old, double l) {
  check_reg(reg);
  LossState state = eval(problem, kind, theta_old);
  Vector grad = gradient(problem, kind, state);
  return quadratic_model_from_grad(state.loss_value, grad, theta_new, theta_old, reg.lambda, l);
}

double kkt_residual(const Problem& problem, LossKind kind, const Regularizer& reg,
                    const Vector& theta) {
  check_reg(reg);
  Vector grad = gradient(problem, kind, eval(problem, kind, theta));
  return kkt_residual_from_grad(grad, theta, reg.lambda);
}

double kkt_residual_from_grad(const Vector& grad, const Vector& theta, double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < theta.size(); ++j) {
    double rho = theta[j] != 0.0
                     ? std::abs(grad[j] + (theta[j] > 0 ? lambda : -lambda))
                     : std::max(std::abs(grad[j]) - lambda, 0.0);
    worst = std::max(worst, rho);
  }
  return worst;
}

Vector prox_step_from_grad(const Vector& theta, const Vector& grad, double lambda, double l) {
  return soft_threshold(theta - grad / l, lambda / l);
}

double quadratic_model_from_grad(double loss_old, const Vector& grad, const Vector& theta_new,
                                 const Vector& theta_old, double lambda, double l) {
  Vector d = theta_new - theta_old;
  return loss_old + grad.dot(d) + 0.5 * l * d.squaredNorm() + lambda * theta_new.lpNorm<1>();
}

}  // namespace sqrtlasso
