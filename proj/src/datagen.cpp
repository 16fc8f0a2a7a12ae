#include "sqrtlasso/datagen.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrtlasso {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, Stream purpose) {
  std::uint64_t salt = 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(purpose) + 1);
  return std::mt19937_64(splitmix64(seed ^ salt));
}

double NormalSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

namespace {

void check_spec(const GenSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw std::invalid_argument("generate: need n >= 1 and d >= 1");
  if (spec.s_star < 0 || spec.s_star > spec.d)
    throw std::invalid_argument("generate: need 0 <= s_star <= d");
  if (!(spec.sigma >= 0) || !std::isfinite(spec.sigma))
    throw std::invalid_argument("generate: sigma must be finite and >= 0");
  if (!(spec.rho >= 0 && spec.rho < 1))
    throw std::invalid_argument("generate: rho must lie in [0, 1)");
  for (const auto& [idx, val] : spec.theta_values) {
    if (idx < 0 || idx >= spec.d)
      throw std::invalid_argument("generate: theta_values index out of range");
    if (!std::isfinite(val)) throw std::invalid_argument("generate: theta_values value not finite");
  }
}

// Draw order per row: the d entries of Z_i, then the shared factor g_i.
Matrix sample_design(Index n, Index d, double rho, NormalSampler& sampler) {
  Matrix x(n, d);
  double a = std::sqrt(1.0 - rho), b = std::sqrt(rho);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = a * sampler.next();
    double g = b * sampler.next();
    for (Index j = 0; j < d; ++j) x(i, j) += g;
  }
  return x;
}

Vector build_theta_star(const GenSpec& spec) {
  Vector theta = Vector::Zero(spec.d);
  if (!spec.theta_values.empty()) {
    for (const auto& [idx, val] : spec.theta_values) theta[idx] = val;
    return theta;
  }
  // 3, -2, 1.5 at indices 0, 1, 3; past the third entry the magnitude cycle
  // continues on consecutive indices 4, 5, ...
  constexpr double cycle[3] = {3.0, -2.0, 1.5};
  constexpr Index lead[3] = {0, 1, 3};
  for (Index s = 0; s < spec.s_star; ++s) {
    Index idx = s < 3 ? lead[s] : s + 1;
    theta[idx] = cycle[s % 3];
  }
  return theta;
}

}  // namespace

Dataset generate(const GenSpec& spec) {
  check_spec(spec);
  NormalSampler design(substream(spec.seed, Stream::Design));
  Dataset out;
  Matrix x = sample_design(spec.n, spec.d, spec.rho, design);
  out.theta_star = build_theta_star(spec);
  out.y = x * out.theta_star;
  if (spec.sigma > 0) {
    NormalSampler noise(substream(spec.seed, Stream::Noise));
    for (Index i = 0; i < spec.n; ++i) out.y[i] += spec.sigma * noise.next();
  }
  out.x = DenseMatrix(std::move(x));
  return out;
}

MultitaskDataset generate_multitask(const GenSpec& spec, const std::vector<double>& sigmas) {
  check_spec(spec);
  if (sigmas.empty()) throw std::invalid_argument("generate_multitask: need at least one sigma");
  for (double s : sigmas)
    if (!(s >= 0) || !std::isfinite(s))
      throw std::invalid_argument("generate_multitask: sigmas must be finite and >= 0");
  const Index m = static_cast<Index>(sigmas.size());

  NormalSampler design(substream(spec.seed, Stream::Design));
  Matrix x = sample_design(spec.n, spec.d, spec.rho, design);
  Vector theta = build_theta_star(spec);

  MultitaskDataset out;
  out.theta_mat = theta.replicate(1, m);
  out.y_mat = x * out.theta_mat;
  // Noise drawn task by task: n entries for column 0, then column 1, ...
  NormalSampler noise(substream(spec.seed, Stream::MultitaskNoise));
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < spec.n; ++i) out.y_mat(i, k) += sigmas[static_cast<std::size_t>(k)] * noise.next();
  out.x = DenseMatrix(std::move(x));
  return out;
}

DenseMatrix generate_chain_graph(Index n, Index d, double rho, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("generate_chain_graph: need n >= 1 and d >= 1");
  if (!(std::abs(rho) < 1)) throw std::invalid_argument("generate_chain_graph: need |rho| < 1");

  // Cholesky of the tridiagonal precision (unit diagonal, off-diagonal -rho):
  // lower-bidiagonal L with diag[j] and sub[j] = L(j+1, j).
  Vector diag(d), sub(std::max<Index>(d - 1, 0));
  double pivot = 1.0;
  for (Index j = 0; j < d; ++j) {
    if (pivot <= 0)
      throw std::invalid_argument("generate_chain_graph: precision not positive definite");
    diag[j] = std::sqrt(pivot);
    if (j + 1 < d) {
      sub[j] = -rho / diag[j];
      pivot = 1.0 - sub[j] * sub[j];
    }
  }

  // x = L^{-T} z has covariance (L L^T)^{-1}, the inverse of the precision.
  NormalSampler sampler(substream(seed, Stream::Graph));
  Matrix x(n, d);
  Vector z(d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) z[j] = sampler.next();
    x(i, d - 1) = z[d - 1] / diag[d - 1];
    for (Index j = d - 2; j >= 0; --j) x(i, j) = (z[j] - sub[j] * x(i, j + 1)) / diag[j];
  }
  return DenseMatrix(std::move(x));
}

}  // namespace sqrtlasso
