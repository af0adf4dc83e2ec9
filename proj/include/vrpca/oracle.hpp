#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vrpca/matrix_core.hpp"

namespace vrpca {

/// Exact eigendecomposition of A = (1/n) X X^T, eigenvalues descending.
class Spectrum {
 public:
  Spectrum(Vector eigenvalues, OrthonormalFrame eigenvectors);

  const Vector& eigenvalues() const noexcept { return values_; }
  const OrthonormalFrame& eigenvectors() const noexcept { return vectors_; }
  Eigen::Index d() const noexcept { return values_.size(); }

  /// s_k - s_{k+1} for 1 <= k < d (1-based, as in the eigengap notation).
  double gap_at(Eigen::Index k) const;

 private:
  Vector values_;
  OrthonormalFrame vectors_;
};

inline constexpr Eigen::Index kDenseOracleMaxDim = 2000;

/// Materializes A and runs cyclic Jacobi until off(A) <= 1e-12 ||A||_F.
/// Throws ContractViolation when d exceeds kDenseOracleMaxDim.
Spectrum dense_eigh(const DataMatrix& x);

struct LeadingSubspace {
  OrthonormalFrame frame;
  std::optional<std::string> warning;  // set when s_k == s_{k+1}: V_k is not unique
};

LeadingSubspace leading_subspace(const Spectrum& spectrum, Eigen::Index k);

/// Requested covariance spectrum for synthetic data.
struct SpectrumSpec {
  std::vector<double> eigenvalues;

  Eigen::Index d() const noexcept { return static_cast<Eigen::Index>(eigenvalues.size()); }
  double gap_at(Eigen::Index k) const;

  /// s_1 = top, then `second`, `second*decay`, `second*decay^2`, ... (d entries).
  static SpectrumSpec geometric_tail(Eigen::Index d, double top, double second, double decay);
};

struct SyntheticData {
  DataMatrix data;
  OrthonormalFrame basis;  // planted eigenvectors Q, column i pairs with eigenvalues[i]
};

/// X = Q diag(sqrt(n s_i)) R^T with Q a random d×d orthogonal matrix and R a
/// random n×d matrix with orthonormal columns, so (1/n) X X^T = Q diag(s) Q^T.
/// Requires n >= d, nonnegative eigenvalues, not all zero. The planted
/// eigenvalues are taken in the given order; sort them to make Q match dense_eigh.
SyntheticData synthesize_planted(const SpectrumSpec& spec, Eigen::Index n, std::uint64_t seed);

DataMatrix synthesize_dataset(const SpectrumSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Random matrix with orthonormal columns (Householder QR of a seeded Gaussian draw).
Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

}  // namespace vrpca
