#pragma once

#include <cstdint>
#include <optional>

#include "vrpca/matrix_core.hpp"
#include "vrpca/oracle.hpp"

namespace vrpca {

enum class InitMethod { gaussian, gaussian_plus_power };

struct InitReport {
  OrthonormalFrame frame;
  InitMethod method = InitMethod::gaussian;
  std::optional<double> alignment_sq;  // <v_1, w_0>^2 (k = 1) or ||V_k^T W_0||_F^2 / k
  std::optional<double> nrank;
  int retries = 0;
};

/// d×k standard Gaussian draw, polar-normalized.
OrthonormalFrame gaussian_init(Eigen::Index d, Eigen::Index k, std::uint64_t seed);

/// One exact power iteration from a Gaussian draw: W_0 = polar(A G).
/// k = 1 is the warm start analysed for the leading eigenvector; k > 1 applies
/// the same step to a d×k block. If A G vanishes the next substream is tried,
/// at most kWarmStartRetries times. `reference` (V_k) fills alignment_sq.
InitReport power_warm_start(const DataMatrix& x, std::uint64_t seed, Eigen::Index k = 1,
                            const std::optional<OrthonormalFrame>& reference = std::nullopt);

inline constexpr int kWarmStartRetries = 8;

/// ||A||_F^2 / ||A||_sp^2 without forming A when n < d (works on the n×n Gram side).
double numerical_rank(const DataMatrix& x);

/// Same quantity from a known spectrum: sum s_i^2 / s_1^2.
double numerical_rank(const Spectrum& spectrum);
double numerical_rank(const Vector& eigenvalues);

/// Lower bound delta^2 / (12 log(d) nrank) on the warm-start alignment.
double warm_start_alignment_bound(double delta, Eigen::Index d, double nrank);

}  // namespace vrpca
