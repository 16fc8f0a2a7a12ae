#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

namespace sqrtlasso {

inline constexpr const char* kVersion = "0.1.0";

using Vector = Eigen::VectorXd;
// Row-major storage: generators fill row by row and CSV I/O streams rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Raised when the sqrt-loss is evaluated inside the overfit region
// (scaled residual below the smoothness floor). Solvers catch it and
// report a NonsmoothStop status instead of crashing.
struct NonsmoothRegionError : std::runtime_error {
  double scaled_residual;  // ||r||_2 / sqrt(n) at the offending point
  int task;                // offending response column; -1 for single-response

  explicit NonsmoothRegionError(double sr, int task_index = -1)
      : std::runtime_error("residual entered the nonsmooth (overfit) region, scaled norm " +
                           std::to_string(sr) +
                           (task_index >= 0 ? " in task " + std::to_string(task_index) : "")),
        scaled_residual(sr),
        task(task_index) {}
};

struct ZeroResponseError : std::runtime_error {
  ZeroResponseError() : std::runtime_error("response vector is identically zero") {}
};

// Dense design matrix with a cache of column squared norms ||X_{*j}||_2^2.
// The cache is built on first use and then reused; the build is guarded so
// concurrent solvers may share one immutable instance.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  explicit DenseMatrix(Matrix m) : mat_(std::move(m)) {
    if (!mat_.allFinite()) throw std::invalid_argument("design matrix has non-finite entries");
  }

  DenseMatrix(const DenseMatrix& other) : mat_(other.mat_) {
    if (other.built_.load(std::memory_order_acquire)) {
      col_sq_norms_ = other.col_sq_norms_;
      built_.store(true, std::memory_order_release);
    }
  }

  DenseMatrix& operator=(const DenseMatrix& other) {
    if (this != &other) {
      mat_ = other.mat_;
      if (other.built_.load(std::memory_order_acquire)) {
        col_sq_norms_ = other.col_sq_norms_;
        built_.store(true, std::memory_order_release);
      } else {
        built_.store(false, std::memory_order_release);
      }
    }
    return *this;
  }

  Index rows() const { return mat_.rows(); }
  Index cols() const { return mat_.cols(); }
  const Matrix& mat() const { return mat_; }

  const Vector& col_sq_norms() const {
    if (!built_.load(std::memory_order_acquire)) {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      if (!built_.load(std::memory_order_relaxed)) {
        col_sq_norms_ = mat_.colwise().squaredNorm().transpose();
        built_.store(true, std::memory_order_release);
      }
    }
    return col_sq_norms_;
  }

 private:
  Matrix mat_;
  mutable Vector col_sq_norms_;
  mutable std::atomic<bool> built_{false};
  mutable std::mutex cache_mutex_;
};

inline Vector mat_vec(const DenseMatrix& a, const Vector& v) {
  if (v.size() != a.cols()) throw std::invalid_argument("mat_vec: length mismatch");
  return a.mat() * v;
}

inline Vector mat_t_vec(const DenseMatrix& a, const Vector& v) {
  if (v.size() != a.rows()) throw std::invalid_argument("mat_t_vec: length mismatch");
  return a.mat().transpose() * v;
}

// A regression instance y ~ X theta. Derived scalars that every solver needs
// (sqrt(n), ||y||_2, the nonsmoothness floor) are computed once here.
struct Problem {
  Problem(DenseMatrix x_in, Vector y_in)
      : x(std::move(x_in)), y(std::move(y_in)), sqrt_n(std::sqrt(double(x.rows()))) {
    if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("empty design matrix");
    if (y.size() != x.rows()) throw std::invalid_argument("y length does not match design rows");
    if (!y.allFinite()) throw std::invalid_argument("response has non-finite entries");
    y_norm = y.norm();
    smooth_floor = 1e-8 * (y_norm / sqrt_n + 1.0);
  }

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }

  DenseMatrix x;
  Vector y;
  double sqrt_n;
  double y_norm;
  // The sqrt-loss is treated as smooth only while ||r||_2/sqrt(n) stays at or
  // above this floor; below it the iterate is in the overfit region.
  double smooth_floor;
};

}  // namespace sqrtlasso
