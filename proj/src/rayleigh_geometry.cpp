#include "vrpca/rayleigh_geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/jacobi.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

namespace {

double checked_sq_norm(const DataMatrix& x, const Vector& w, const char* what) {
  if (w.size() != x.d()) throw ContractViolation(std::string(what) + ": dimension mismatch");
  const double sq = w.squaredNorm();
  if (!(sq > 0.0)) throw ContractViolation(std::string(what) + ": zero vector");
  return sq;
}

Vector apply(const DataMatrix& x, const Vector& w) {
  return covariance_apply(x, Matrix(w)).col(0);
}

// Uniform unit vector orthogonal to `normal` (a unit vector).
Vector random_tangent(const Vector& normal, CounterRng& rng) {
  for (;;) {
    Vector g(normal.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.gaussian();
    g -= normal.dot(g) * normal;
    const double norm = g.norm();
    if (norm > 1e-8) return g / norm;
  }
}

}  // namespace

double rayleigh(const DataMatrix& x, const Vector& w) {
  const double sq = checked_sq_norm(x, w, "rayleigh");
  return -w.dot(apply(x, w)) / sq;
}

Vector rayleigh_grad(const DataMatrix& x, const Vector& w) {
  const double sq = checked_sq_norm(x, w, "rayleigh_grad");
  const Vector aw = apply(x, w);
  const double f = -w.dot(aw) / sq;
  return -(2.0 / sq) * (f * w + aw);
}

Matrix rayleigh_hessian(const DataMatrix& x, const Vector& w) {
  const double sq = checked_sq_norm(x, w, "rayleigh_hessian");
  if (x.d() > kDenseOracleMaxDim) {
    throw ContractViolation("rayleigh_hessian: d exceeds the dense limit; use directional_curvature");
  }
  const Eigen::Index d = x.d();
  const Matrix a = materialize_covariance(x);
  const double f = -w.dot(a * w) / sq;
  Matrix inner = a;
  inner.diagonal().array() += f;
  const Matrix m = (Matrix::Identity(d, d) - (4.0 / sq) * w * w.transpose()) * inner;
  return -(1.0 / sq) * (m + m.transpose());
}

double directional_curvature(const DataMatrix& x, const Vector& w, const Vector& g) {
  const double sq = checked_sq_norm(x, w, "directional_curvature");
  if (g.size() != w.size()) throw ContractViolation("directional_curvature: dimension mismatch");
  const Vector aw = apply(x, w);
  const Vector ag = apply(x, g);
  const double f = -w.dot(aw) / sq;
  // g^T (F I + A) g and w^T (F I + A) g
  const double gbg = f * g.squaredNorm() + g.dot(ag);
  const double wbg = f * w.dot(g) + w.dot(ag);
  return -(2.0 / sq) * (gbg - (4.0 / sq) * g.dot(w) * wbg);
}

ConvexityCertificate nonconvexity_certificate(const DataMatrix& x, const Vector& w) {
  const Matrix h = rayleigh_hessian(x, w);
  const SymmetricEigen eig = jacobi_eigh(0.5 * (h + h.transpose()));
  ConvexityCertificate cert;
  const Eigen::Index last = eig.values.size() - 1;
  cert.min_eigenvalue = eig.values[last];
  const double tol = 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff());
  if (cert.min_eigenvalue < -tol) {
    cert.is_psd = false;
    cert.witness = eig.vectors.col(last);
  }
  return cert;
}

ConvexRegion::ConvexRegion(Vector w0, double radius, double lambda)
    : w0_(std::move(w0)), radius_(radius), lambda_(lambda) {
  if (std::abs(w0_.norm() - 1.0) > 1e-10) throw ContractViolation("ConvexRegion: w0 must be unit");
  if (!(radius_ > 0.0)) throw ContractViolation("ConvexRegion: radius must be positive");
}

bool ConvexRegion::contains(const Vector& w, double tol) const {
  if (w.size() != w0_.size()) return false;
  return std::abs(w.dot(w0_) - 1.0) <= tol && (w - w0_).norm() <= radius_ + tol;
}

ConvexRegionBuild build_convex_region(const Spectrum& spectrum, const Vector& w0) {
  if (w0.size() != spectrum.d() || spectrum.d() < 2) {
    throw ContractViolation("build_convex_region: dimension mismatch");
  }
  if (std::abs(w0.norm() - 1.0) > 1e-10) throw ContractViolation("build_convex_region: w0 not unit");
  const double s1 = spectrum.eigenvalues()[0];
  if (std::abs(s1 - 1.0) > 1e-9) {
    throw ContractViolation("build_convex_region: spectral norm is " + std::to_string(s1) +
                            ", rescale A to spectral norm 1");
  }
  const double lambda = spectrum.gap_at(1);
  if (!(lambda > 0.0)) throw ContractViolation("build_convex_region: zero eigengap");

  Vector v1 = spectrum.eigenvectors().column(0);
  if ((w0 - v1).norm() > (w0 + v1).norm()) v1 = -v1;
  const double distance = (w0 - v1).norm();
  const double limit = lambda / 44.0;
  if (distance > limit) {
    throw ContractViolation("build_convex_region: ||w0 - v1|| = " + std::to_string(distance) +
                            " exceeds lambda/44 = " + std::to_string(limit));
  }
  ConvexRegion region(w0, lambda / 22.0, lambda);
  Vector projected = v1 / v1.dot(w0);
  return ConvexRegionBuild{std::move(region), std::move(v1), distance, std::move(projected)};
}

CurvatureRange probe_strong_convexity(const ConvexRegion& region, const DataMatrix& x,
                                      std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("probe_strong_convexity: empty probe");
  if (region.w0().size() != x.d()) throw ContractViolation("probe_strong_convexity: dimension mismatch");
  const Vector& w0 = region.w0();
  const double tangent_dim = static_cast<double>(w0.size() - 1);

  CurvatureRange range{std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity(), samples};
  const CounterRng root(seed);
  for (std::int64_t s = 0; s < samples; ++s) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(s));
    // Uniform in the (d-1)-dimensional tangent ball.
    const double rho = region.radius() * std::pow(rng.uniform(), 1.0 / tangent_dim);
    const Vector w = w0 + rho * random_tangent(w0, rng);
    const Vector g = random_tangent(w0, rng);
    const double curvature = directional_curvature(x, w, g);
    range.min_curvature = std::min(range.min_curvature, curvature);
    range.max_curvature = std::max(range.max_curvature, curvature);
  }
  return range;
}

double tightness_second_derivative(double lambda, double eps, double t) {
  const double t2 = t * t;
  return 2.0 * (3.0 * t2 - 1.0) * eps * lambda / std::pow(t2 + 1.0, 3);
}

TightnessCounterexample tightness_counterexample(double lambda, double eps) {
  if (!(lambda > 0.0 && lambda < 0.5) || !(eps > 0.0 && eps < 0.5)) {
    throw ContractViolation("tightness_counterexample: lambda and eps must lie in (0, 1/2)");
  }
  // Three columns sqrt(3) e_1, sqrt(3 (1 - lambda)) e_2, 0 give A = diag(1, 1 - lambda, 0).
  Matrix cols = Matrix::Zero(3, 3);
  cols(0, 0) = std::sqrt(3.0);
  cols(1, 1) = std::sqrt(3.0 * (1.0 - lambda));
  DataMatrix data(std::move(cols));

  const double p = std::sqrt((1.0 + eps) * lambda);
  Vector w0(3);
  w0 << std::sqrt(1.0 - p * p), 0.0, p;
  const Vector v1 = Vector::Unit(3, 0);
  const Vector ray = Vector::Unit(3, 1);
  const double hessian_dir = directional_curvature(data, w0, ray);
  return TightnessCounterexample{std::move(data), std::move(w0), v1, ray,
                                 tightness_second_derivative(lambda, eps, 0.0), hessian_dir};
}

}  // namespace vrpca
