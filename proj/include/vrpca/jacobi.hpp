#pragma once

#include <Eigen/Dense>

#include <vector>

namespace vrpca {

/// Eigendecomposition of a dense symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns are eigenvectors; empty when not requested
  int sweeps = 0;
  /// Off-diagonal Frobenius norm before the first sweep and after each sweep.
  std::vector<double> off_diagonal_history;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops to
/// `rel_tol * ||A||_F`. Throws NumericalError if `max_sweeps` is exhausted.
/// Only the lower triangle of `a` is trusted to be symmetric with the upper;
/// asymmetric input is a contract violation.
SymmetricEigen jacobi_eigh(const Eigen::MatrixXd& a, bool want_vectors = true,
                           double rel_tol = 1e-12, int max_sweeps = 60);

/// Thin SVD M = U diag(S) V^T of an r×c matrix with r >= c (one-sided Jacobi).
/// Singular values descending. Columns of U belonging to zero singular values
/// are completed to an orthonormal set, so U always has orthonormal columns.
struct SmallSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

SmallSvd jacobi_svd(const Eigen::MatrixXd& m, int max_sweeps = 60);

}  // namespace vrpca
