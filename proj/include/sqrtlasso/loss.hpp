#pragma once

#include "sqrtlasso/core.hpp"

namespace sqrtlasso {

enum class LossKind { SqrtL2, LeastSquares };

struct LossState {
  Vector theta;
  Vector residual;       // r = y - X theta
  double residual_norm;  // ||r||_2
  double loss_value;     // SqrtL2: ||r||_2/sqrt(n); LeastSquares: ||r||_2^2/n
};

// Throws NonsmoothRegionError for SqrtL2 when ||r||_2/sqrt(n) < smooth_floor.
LossState eval(const Problem& problem, LossKind kind, const Vector& theta);

// SqrtL2: -X^T r / (sqrt(n) ||r||_2).  LeastSquares: -2 X^T r / n.
Vector gradient(const Problem& problem, LossKind kind, const LossState& state);

// SqrtL2: (1/(sqrt(n)||r||_2)) X^T (I - r r^T/||r||^2) X v, applied implicitly
// in O(nd).  LeastSquares: 2 X^T X v / n.
Vector hessian_apply(const Problem& problem, LossKind kind, const LossState& state,
                     const Vector& v);

// The sqrt-loss Hessian in the implicit form H = c (X^T X - w w^T) that the
// coordinate-descent subproblem consumes: c = 1/(sqrt(n)||r||), w = X^T r/||r||,
// diag[j] = c (||X_{*j}||^2 - w_j^2).
struct HessianFactors {
  double c;
  Vector w;
  Vector diag;
};
HessianFactors hessian_diag_and_deflation(const Problem& problem, const LossState& state);

}  // namespace sqrtlasso
