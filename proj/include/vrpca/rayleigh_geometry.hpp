#pragma once

#include <cstdint>
#include <optional>

#include "vrpca/matrix_core.hpp"
#include "vrpca/oracle.hpp"

namespace vrpca {

/// F_A(w) = -w^T A w / ||w||^2 with A = (1/n) X X^T applied through covariance_apply.
double rayleigh(const DataMatrix& x, const Vector& w);

/// -(2 / ||w||^2) (F(w) I + A) w
Vector rayleigh_grad(const DataMatrix& x, const Vector& w);

/// -(1 / ||w||^2) (M + M^T) with M = (I - 4 w w^T / ||w||^2)(F(w) I + A).
/// Materializes d×d; guarded by kDenseOracleMaxDim.
Matrix rayleigh_hessian(const DataMatrix& x, const Vector& w);

/// g^T H(w) g without forming H (two covariance_apply calls).
double directional_curvature(const DataMatrix& x, const Vector& w, const Vector& g);

struct ConvexityCertificate {
  bool is_psd = true;
  double min_eigenvalue = 0.0;
  std::optional<Vector> witness;  // unit g with g^T H g < 0 when not PSD
};

/// Smallest Hessian eigenvalue; a negative one comes with its eigenvector as witness.
ConvexityCertificate nonconvexity_certificate(const DataMatrix& x, const Vector& w);

/// H_{w0} ∩ B_{w0}(radius): points on the tangent hyperplane <w, w0> = 1 within radius of w0.
class ConvexRegion {
 public:
  ConvexRegion(Vector w0, double radius, double lambda);

  const Vector& w0() const noexcept { return w0_; }
  double radius() const noexcept { return radius_; }
  double lambda() const noexcept { return lambda_; }

  bool contains(const Vector& w, double tol = 1e-10) const;

 private:
  Vector w0_;
  double radius_;
  double lambda_;
};

struct ConvexRegionBuild {
  ConvexRegion region;
  Vector v1;                 // leading eigenvector, sign chosen closest to w0
  double distance;           // ||w0 - v1||
  Vector projected_optimum;  // v1 / <v1, w0>, the ray through v1 meeting H_{w0}
};

/// Requires ||A||_sp = 1 (within 1e-9), a positive gap lambda = s_1 - s_2 and
/// ||w0 - v1|| <= lambda / 44; builds the region of radius lambda / 22.
ConvexRegionBuild build_convex_region(const Spectrum& spectrum, const Vector& w0);

struct CurvatureRange {
  double min_curvature;
  double max_curvature;
  std::int64_t samples;
};

/// Samples points w in the region and unit tangent directions g (<g, w0> = 0);
/// returns the extremal g^T H(w) g. Sampling can falsify the curvature bounds
/// but never certifies them.
CurvatureRange probe_strong_convexity(const ConvexRegion& region, const DataMatrix& x,
                                      std::int64_t samples, std::uint64_t seed);

struct TightnessCounterexample {
  DataMatrix data;  // A = diag(1, 1 - lambda, 0)
  Vector w0;        // (sqrt(1 - p^2), 0, p), p = sqrt((1 + eps) lambda)
  Vector v1;        // e_1
  Vector ray_direction;             // (0, 1, 0)
  double second_derivative_at_0;    // -2 eps lambda
  double hessian_directional_at_0;  // ray^T H(w0) ray, computed from the data
};

TightnessCounterexample tightness_counterexample(double lambda, double eps);

/// 2 (3 t^2 - 1) eps lambda / (t^2 + 1)^3: second derivative of F along the ray w0 + t e_2.
double tightness_second_derivative(double lambda, double eps, double t);

}  // namespace vrpca
