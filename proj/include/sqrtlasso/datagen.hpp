#pragma once

#include "sqrtlasso/core.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sqrtlasso {

// Stream splitting: every sampled object draws from its own substream so that
// e.g. changing sigma never perturbs the design draw. The engine for
// (seed, purpose) is mt19937_64 seeded with splitmix64(seed ^ golden * (purpose + 1)).
enum class Stream : std::uint64_t { Design = 0, Noise = 1, MultitaskNoise = 2, Graph = 3 };

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 substream(std::uint64_t seed, Stream purpose);

// Standard normals via the Marsaglia polar method on 53-bit uniforms; the
// standard library's normal_distribution is implementation-defined, which
// would break the bit-level determinism promise.
class NormalSampler {
 public:
  explicit NormalSampler(std::mt19937_64 engine) : engine_(std::move(engine)) {}
  double next();

 private:
  double uniform();  // [0, 1) with 53 random bits
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct GenSpec {
  Index n = 200;
  Index d = 2000;
  Index s_star = 3;
  double sigma = 0.5;
  double rho = 0.5;  // equicorrelation Sigma_jk of the design rows
  std::uint64_t seed = 0;
  // Optional explicit sparse coefficients (index, value); overrides s_star.
  std::vector<std::pair<Index, double>> theta_values;
};

struct Dataset {
  DenseMatrix x;
  Vector y;
  Vector theta_star;
};

// Rows X_i iid N(0, (1-rho) I + rho 11^T) via X_i = sqrt(1-rho) Z_i + sqrt(rho) g_i 1,
// y = X theta* + sigma * eps. Default theta* places 3, -2, 1.5 at indices 0, 1, 3
// (further entries continue that magnitude cycle at 4, 5, ...).
Dataset generate(const GenSpec& spec);

struct MultitaskDataset {
  DenseMatrix x;
  Matrix y_mat;      // n x m
  Matrix theta_mat;  // d x m, shared row support
};

// Single-task scheme reused per response column: shared design and shared
// coefficient rows, independent noise with per-task sigma_k.
MultitaskDataset generate_multitask(const GenSpec& spec, const std::vector<double>& sigmas);

// Gaussian sample whose precision matrix is tridiagonal with unit diagonal and
// off-diagonal -rho (chain graph), drawn by back-substitution against the
// bidiagonal Cholesky factor of the precision.
DenseMatrix generate_chain_graph(Index n, Index d, double rho, std::uint64_t seed);

}  // namespace sqrtlasso
