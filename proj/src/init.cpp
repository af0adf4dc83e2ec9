#include "vrpca/init.hpp"

#include <cmath>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/jacobi.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

namespace {

Matrix gaussian_block(Eigen::Index d, Eigen::Index k, CounterRng& rng) {
  Matrix g(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.gaussian();
  }
  return g;
}

}  // namespace

OrthonormalFrame gaussian_init(Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
  if (k < 1 || k > d) {
    throw ContractViolation("gaussian_init: need 1 <= k <= d (k = " + std::to_string(k) +
                            ", d = " + std::to_string(d) + ")");
  }
  CounterRng rng(seed);
  return polar_normalize(gaussian_block(d, k, rng));
}

InitReport power_warm_start(const DataMatrix& x, std::uint64_t seed, Eigen::Index k,
                            const std::optional<OrthonormalFrame>& reference) {
  if (k < 1 || k > x.d()) throw ContractViolation("power_warm_start: need 1 <= k <= d");
  const CounterRng root(seed);
  for (int attempt = 0; attempt <= kWarmStartRetries; ++attempt) {
    CounterRng rng = attempt == 0 ? root : root.substream(static_cast<std::uint64_t>(attempt));
    const Matrix g = gaussian_block(x.d(), k, rng);
    const Matrix ag = covariance_apply(x, g);
    // ||A||_sp <= r, so this is a relative test for A G == 0.
    const double floor = 1e-12 * std::max(x.r(), 1e-300) * g.norm();
    if (!(ag.norm() > floor)) continue;
    try {
      InitReport report{polar_normalize(ag), InitMethod::gaussian_plus_power, std::nullopt,
                        std::nullopt, attempt};
      if (reference) {
        const double k_d = static_cast<double>(k);
        report.alignment_sq = (k_d - potential(*reference, report.frame)) / k_d;
      }
      return report;
    } catch (const DegenerateIterate&) {
      // Rank-deficient block; try the next substream.
    }
  }
  throw NumericalError("power_warm_start: covariance annihilated " +
                       std::to_string(kWarmStartRetries + 1) + " Gaussian draws");
}

double numerical_rank(const Vector& eigenvalues) {
  const double top = eigenvalues.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) throw NumericalError("numerical_rank: zero matrix");
  return eigenvalues.squaredNorm() / (top * top);
}

double numerical_rank(const Spectrum& spectrum) { return numerical_rank(spectrum.eigenvalues()); }

double numerical_rank(const DataMatrix& x) {
  // The nonzero spectra of (1/n) X X^T and (1/n) X^T X coincide; use the smaller side.
  const double inv_n = 1.0 / static_cast<double>(x.n());
  Matrix gram = x.d() <= x.n() ? Matrix(x.matrix() * x.matrix().transpose())
                               : Matrix(x.matrix().transpose() * x.matrix());
  gram *= inv_n;
  gram = 0.5 * (gram + gram.transpose());
  const SymmetricEigen eig = jacobi_eigh(gram, /*want_vectors=*/false);
  return numerical_rank(eig.values);
}

double warm_start_alignment_bound(double delta, Eigen::Index d, double nrank) {
  if (d < 2) throw ContractViolation("warm_start_alignment_bound: need d >= 2");
  return delta * delta / (12.0 * std::log(static_cast<double>(d)) * nrank);
}

}  // namespace vrpca
