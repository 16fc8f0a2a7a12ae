#include "sqrtlasso/loss.hpp"

#include <stdexcept>

namespace sqrtlasso {

namespace {

void check_smooth(const Problem& problem, const LossState& state) {
  double scaled = state.residual_norm / problem.sqrt_n;
  if (scaled < problem.smooth_floor) throw NonsmoothRegionError(scaled);
}

}  // namespace

LossState eval(const Problem& problem, LossKind kind, const Vector& theta) {
  if (theta.size() != problem.d()) throw std::invalid_argument("eval: theta length mismatch");
  LossState state;
  state.theta = theta;
  state.residual = problem.y - problem.x.mat() * theta;
  state.residual_norm = state.residual.norm();
  if (kind == LossKind::SqrtL2) {
    check_smooth(problem, state);
    state.loss_value = state.residual_norm / problem.sqrt_n;
  } else {
    state.loss_value = state.residual_norm * state.residual_norm / double(problem.n());
  }
  return state;
}

Vector gradient(const Problem& problem, LossKind kind, const LossState& state) {
  if (kind == LossKind::SqrtL2) {
    check_smooth(problem, state);
    return problem.x.mat().transpose() * state.residual *
           (-1.0 / (problem.sqrt_n * state.residual_norm));
  }
  return problem.x.mat().transpose() * state.residual * (-2.0 / double(problem.n()));
}

Vector hessian_apply(const Problem& problem, LossKind kind, const LossState& state,
                     const Vector& v) {
  if (v.size() != problem.d()) throw std::invalid_argument("hessian_apply: v length mismatch");
  Vector z = problem.x.mat() * v;
  if (kind == LossKind::LeastSquares) {
    return problem.x.mat().transpose() * z * (2.0 / double(problem.n()));
  }
  check_smooth(problem, state);
  // project z off the residual direction, then pull back: c X^T (I - u u^T) X v
  Vector u = state.residual / state.residual_norm;
  double c = 1.0 / (problem.sqrt_n * state.residual_norm);
  return problem.x.mat().transpose() * (z - u * u.dot(z)) * c;
}

HessianFactors hessian_diag_and_deflation(const Problem& problem, const LossState& state) {
  check_smooth(problem, state);
  HessianFactors f;
  f.c = 1.0 / (problem.sqrt_n * state.residual_norm);
  f.w = problem.x.mat().transpose() * (state.residual / state.residual_norm);
  f.diag = f.c * (problem.x.col_sq_norms().array() - f.w.array().square()).matrix();
  return f;
}

}  // namespace sqrtlasso
