#pragma once

#include "sqrtlasso/loss.hpp"

namespace sqrtlasso {

struct Regularizer {
  double lambda;  // > 0, finite
};

// out[j] = sign(x[j]) max(|x[j]| - t, 0)
Vector soft_threshold(const Vector& x, double t);

// F_lambda(theta) = loss(theta) + lambda ||theta||_1
double objective(const Problem& problem, LossKind kind, const Regularizer& reg,
                 const Vector& theta);

// Prox-gradient map T_{L,lambda}(theta) = S_{lambda/L}(theta - grad/L).
Vector prox_grad_step(const Problem& problem, LossKind kind, const Regularizer& reg,
                      const Vector& theta, double l);

// Q_lambda(theta_new, theta_old) with step scale L: the loss linearization at
// theta_old plus (L/2)||theta_new - theta_old||^2 plus the penalty at theta_new.
double quadratic_model(const Problem& problem, LossKind kind, const Regularizer& reg,
                       const Vector& theta_new, const Vector& theta_old, double l);

// Approximate KKT residual omega_lambda(theta) = min over g in the l1
// subdifferential of ||grad + lambda g||_inf, in closed coordinate-wise form:
// |grad_j + lambda sign(theta_j)| where theta_j != 0, else max(|grad_j| - lambda, 0).
double kkt_residual(const Problem& problem, LossKind kind, const Regularizer& reg,
                    const Vector& theta);

// Gradient-level forms used inside solver loops where the loss state and
// gradient are already at hand.
double kkt_residual_from_grad(const Vector& grad, const Vector& theta, double lambda);
Vector prox_step_from_grad(const Vector& theta, const Vector& grad, double lambda, double l);
double quadratic_model_from_grad(double loss_old, const Vector& grad, const Vector& theta_new,
                                 const Vector& theta_old, double lambda, double l);

}  // namespace sqrtlasso
