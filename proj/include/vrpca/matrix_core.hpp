#pragma once

#include <Eigen/Dense>

#include <utility>

namespace vrpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n data points x_1..x_n in R^d stored as the columns of a d×n matrix.
/// Immutable after construction; r = max_i ||x_i||^2 is cached.
class DataMatrix {
 public:
  /// Throws ContractViolation on empty or non-finite input.
  explicit DataMatrix(Matrix columns);

  Eigen::Index d() const noexcept { return x_.rows(); }
  Eigen::Index n() const noexcept { return x_.cols(); }
  double r() const noexcept { return r_; }

  const Matrix& matrix() const noexcept { return x_; }
  auto column(Eigen::Index i) const { return x_.col(i); }

 private:
  Matrix x_;
  double r_ = 0.0;
};

/// d×k matrix with orthonormal columns, ||W^T W - I||_max <= kOrthonormalTol.
class OrthonormalFrame {
 public:
  static constexpr double kOrthonormalTol = 1e-10;

  /// Validates orthonormality; throws ContractViolation otherwise.
  explicit OrthonormalFrame(Matrix w);

  Eigen::Index d() const noexcept { return w_.rows(); }
  Eigen::Index k() const noexcept { return w_.cols(); }
  const Matrix& matrix() const noexcept { return w_; }
  auto column(Eigen::Index i) const { return w_.col(i); }

  /// max_ij |(W^T W - I)_ij|
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  OrthonormalFrame(Matrix w, Unchecked) : w_(std::move(w)) {}
  friend OrthonormalFrame polar_normalize(const Matrix& wp);

  Matrix w_;
};

/// Orthogonal k×k matrix (B^T B = I within 1e-10).
class Rotation {
 public:
  explicit Rotation(Matrix b);
  static Rotation identity(Eigen::Index k) { return Rotation(Matrix::Identity(k, k)); }

  Eigen::Index k() const noexcept { return b_.rows(); }
  const Matrix& matrix() const noexcept { return b_; }

 private:
  Matrix b_;
};

double orthonormality_error(const Matrix& w);

/// (1/n) sum_i x_i (x_i^T W) in O(ndk), without forming the d×d covariance.
Matrix covariance_apply(const DataMatrix& x, const Matrix& w);

/// Same product, also returning the n×k block X^T W that the solvers reuse.
Matrix covariance_apply(const DataMatrix& x, const Matrix& w, Matrix& projections);

/// W' (W'^T W')^{-1/2}. The inverse square root comes from a Jacobi
/// eigendecomposition of the k×k Gram matrix; for k = 1 this is exactly
/// division by the Euclidean norm. Throws DegenerateIterate when the smallest
/// Gram eigenvalue is <= kMinGramEigenvalue.
OrthonormalFrame polar_normalize(const Matrix& wp);

inline constexpr double kMinGramEigenvalue = 1e-12;

/// B = V U^T for the SVD U S V^T of C^T D: the orthogonal B minimizing ||C - D B||_F.
Rotation procrustes_rotation(const OrthonormalFrame& c, const OrthonormalFrame& d);
Rotation procrustes_rotation(const Matrix& c, const Matrix& d);

/// k - ||V^T W||_F^2, in [0, k]; zero iff the column spaces coincide.
/// Evaluated as ||W - V V^T W||_F^2, which is the same quantity for orthonormal
/// W but keeps full relative accuracy when the value is tiny.
double potential(const OrthonormalFrame& v, const OrthonormalFrame& w);
double potential(const Matrix& v, const Matrix& w);

/// ||A W - W (W^T A W)||_F with A = (1/n) X X^T applied implicitly.
double rayleigh_residual(const DataMatrix& x, const Matrix& w);

struct RescaledData {
  DataMatrix data;
  double scale;  // the original r; data = X / sqrt(scale)
};

/// Divides every column by sqrt(r) so the rescaled data has r = 1.
/// A run on the rescaled data with step eta matches a run on the original with eta / r.
RescaledData rescale_dataset(const DataMatrix& x);

/// Dense (1/n) X X^T. Only for oracle/diagnostic use at desk scale.
Matrix materialize_covariance(const DataMatrix& x);

}  // namespace vrpca
