#include "vrpca/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/jacobi.hpp"

namespace vrpca {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()) + ")");
  }
}

}  // namespace

DataMatrix::DataMatrix(Matrix columns) : x_(std::move(columns)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw ContractViolation("DataMatrix: need d >= 1 and n >= 1");
  }
  if (!x_.allFinite()) throw ContractViolation("DataMatrix: non-finite entry");
  r_ = x_.colwise().squaredNorm().maxCoeff();
}

double orthonormality_error(const Matrix& w) {
  const Matrix gram = w.transpose() * w;
  return (gram - Matrix::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff();
}

OrthonormalFrame::OrthonormalFrame(Matrix w) : w_(std::move(w)) {
  if (w_.cols() < 1 || w_.cols() > w_.rows()) {
    throw ContractViolation("OrthonormalFrame: need 1 <= k <= d");
  }
  const double err = vrpca::orthonormality_error(w_);
  if (!(err <= kOrthonormalTol)) {
    throw ContractViolation("OrthonormalFrame: columns not orthonormal (error " +
                            std::to_string(err) + ")");
  }
}

double OrthonormalFrame::orthonormality_error() const { return vrpca::orthonormality_error(w_); }

Rotation::Rotation(Matrix b) : b_(std::move(b)) {
  if (b_.rows() != b_.cols() || b_.rows() < 1) throw ContractViolation("Rotation: not square");
  if (vrpca::orthonormality_error(b_) > 1e-10) {
    throw ContractViolation("Rotation: matrix is not orthogonal");
  }
}

Matrix covariance_apply(const DataMatrix& x, const Matrix& w, Matrix& projections) {
  if (w.rows() != x.d()) {
    throw ContractViolation("covariance_apply: W has " + std::to_string(w.rows()) +
                            " rows, data dimension is " + std::to_string(x.d()));
  }
  projections.noalias() = x.matrix().transpose() * w;
  Matrix out = x.matrix() * projections;
  out /= static_cast<double>(x.n());
  return out;
}

Matrix covariance_apply(const DataMatrix& x, const Matrix& w) {
  Matrix projections;
  return covariance_apply(x, w, projections);
}

OrthonormalFrame polar_normalize(const Matrix& wp) {
  const Eigen::Index k = wp.cols();
  if (k < 1 || k > wp.rows()) throw ContractViolation("polar_normalize: need 1 <= k <= d");

  if (k == 1) {
    const double sq = wp.col(0).squaredNorm();
    if (!(sq > kMinGramEigenvalue)) {
      throw DegenerateIterate(
          "degenerate iterate: Gram matrix min eigenvalue " + std::to_string(sq), sq);
    }
    return OrthonormalFrame(wp / std::sqrt(sq), OrthonormalFrame::Unchecked{});
  }

  const Matrix gram = wp.transpose().lazyProduct(wp);
  const SymmetricEigen eig = jacobi_eigh(0.5 * (gram + gram.transpose()));
  const double min_eig = eig.values[k - 1];
  if (!(min_eig > kMinGramEigenvalue)) {
    throw DegenerateIterate(
        "degenerate iterate: Gram matrix min eigenvalue " + std::to_string(min_eig), min_eig);
  }
  const Vector inv_sqrt = eig.values.array().rsqrt();
  const Matrix m = eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
  return OrthonormalFrame(wp.lazyProduct(m), OrthonormalFrame::Unchecked{});
}

Rotation procrustes_rotation(const Matrix& c, const Matrix& d) {
  require_same_shape(c, d, "procrustes_rotation");
  const SmallSvd svd = jacobi_svd(c.transpose().lazyProduct(d));
  return Rotation(svd.v * svd.u.transpose());
}

Rotation procrustes_rotation(const OrthonormalFrame& c, const OrthonormalFrame& d) {
  return procrustes_rotation(c.matrix(), d.matrix());
}

double potential(const Matrix& v, const Matrix& w) {
  require_same_shape(v, w, "potential");
  const Matrix residual = w - v * (v.transpose() * w);
  return std::clamp(residual.squaredNorm(), 0.0, static_cast<double>(w.cols()));
}

double potential(const OrthonormalFrame& v, const OrthonormalFrame& w) {
  return potential(v.matrix(), w.matrix());
}

double rayleigh_residual(const DataMatrix& x, const Matrix& w) {
  const Matrix aw = covariance_apply(x, w);
  return (aw - w * (w.transpose() * aw)).norm();
}

RescaledData rescale_dataset(const DataMatrix& x) {
  if (!(x.r() > 0.0)) throw NumericalError("rescale_dataset: all-zero dataset");
  const double scale = x.r();
  return RescaledData{DataMatrix(x.matrix() / std::sqrt(scale)), scale};
}

Matrix materialize_covariance(const DataMatrix& x) {
  Matrix a = x.matrix() * x.matrix().transpose();
  a /= static_cast<double>(x.n());
  return 0.5 * (a + a.transpose());
}

}  // namespace vrpca
