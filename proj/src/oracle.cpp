#include "vrpca/oracle.hpp"

#include <cmath>

#include "vrpca/errors.hpp"
#include "vrpca/jacobi.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

Spectrum::Spectrum(Vector eigenvalues, OrthonormalFrame eigenvectors)
    : values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)) {
  if (values_.size() != vectors_.k()) throw ContractViolation("Spectrum: size mismatch");
  for (Eigen::Index i = 1; i < values_.size(); ++i) {
    if (values_[i] > values_[i - 1]) throw ContractViolation("Spectrum: not sorted descending");
  }
}

double Spectrum::gap_at(Eigen::Index k) const {
  if (k < 1 || k >= values_.size()) throw ContractViolation("gap_at: need 1 <= k < d");
  return values_[k - 1] - values_[k];
}

Spectrum dense_eigh(const DataMatrix& x) {
  if (x.d() > kDenseOracleMaxDim) {
    throw ContractViolation("dense_eigh: d = " + std::to_string(x.d()) + " exceeds " +
                            std::to_string(kDenseOracleMaxDim) +
                            "; use an iterative solver (vrpca_block / orthogonal_iteration)");
  }
  SymmetricEigen eig = jacobi_eigh(materialize_covariance(x));
  return Spectrum(std::move(eig.values), OrthonormalFrame(std::move(eig.vectors)));
}

LeadingSubspace leading_subspace(const Spectrum& spectrum, Eigen::Index k) {
  if (k < 1 || k > spectrum.d()) throw ContractViolation("leading_subspace: need 1 <= k <= d");
  std::optional<std::string> warning;
  if (k < spectrum.d() && spectrum.gap_at(k) <= 0.0) {
    warning = "eigengap at k=" + std::to_string(k) + " is zero; leading subspace is not unique";
  }
  return LeadingSubspace{OrthonormalFrame(spectrum.eigenvectors().matrix().leftCols(k)),
                         std::move(warning)};
}

double SpectrumSpec::gap_at(Eigen::Index k) const {
  if (k < 1 || k >= d()) throw ContractViolation("SpectrumSpec::gap_at: need 1 <= k < d");
  return eigenvalues[static_cast<std::size_t>(k - 1)] - eigenvalues[static_cast<std::size_t>(k)];
}

SpectrumSpec SpectrumSpec::geometric_tail(Eigen::Index d, double top, double second,
                                          double decay) {
  SpectrumSpec spec;
  spec.eigenvalues.reserve(static_cast<std::size_t>(d));
  spec.eigenvalues.push_back(top);
  double s = second;
  for (Eigen::Index i = 1; i < d; ++i) {
    spec.eigenvalues.push_back(s);
    s *= decay;
  }
  return spec;
}

Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  if (cols > rows) throw ContractViolation("random_orthonormal: cols > rows");
  CounterRng rng(seed);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Fix the sign ambiguity so the draw is Haar-distributed.
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

SyntheticData synthesize_planted(const SpectrumSpec& spec, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index d = spec.d();
  if (d < 1) throw ContractViolation("synthesize_dataset: empty spectrum");
  if (n < d) {
    throw ContractViolation("synthesize_dataset: need n >= d (n = " + std::to_string(n) +
                            ", d = " + std::to_string(d) + ")");
  }
  bool any_positive = false;
  for (const double s : spec.eigenvalues) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw ContractViolation("synthesize_dataset: eigenvalues must be finite and nonnegative");
    }
    any_positive = any_positive || s > 0.0;
  }
  if (!any_positive) throw ContractViolation("synthesize_dataset: all-zero spectrum");

  CounterRng root(seed);
  Matrix q = random_orthonormal(d, d, root.substream(0).next_u64());
  const Matrix r = random_orthonormal(n, d, root.substream(1).next_u64());

  Vector scale(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    scale[i] = std::sqrt(static_cast<double>(n) * spec.eigenvalues[static_cast<std::size_t>(i)]);
  }
  Matrix x = (q * scale.asDiagonal()) * r.transpose();
  return SyntheticData{DataMatrix(std::move(x)), OrthonormalFrame(std::move(q))};
}

DataMatrix synthesize_dataset(const SpectrumSpec& spec, Eigen::Index n, std::uint64_t seed) {
  return synthesize_planted(spec, n, seed).data;
}

}  // namespace vrpca
