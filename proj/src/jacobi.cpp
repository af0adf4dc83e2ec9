#include "vrpca/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vrpca/errors.hpp"

namespace vrpca {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  const Eigen::Index d = a.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) sum += 2.0 * a(i, j) * a(i, j);
  }
  return std::sqrt(sum);
}

// Sorts eigen/singular pairs by descending value, permuting columns alongside.
std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  return order;
}

}  // namespace

SymmetricEigen jacobi_eigh(const Eigen::MatrixXd& input, bool want_vectors, double rel_tol,
                           int max_sweeps) {
  if (input.rows() != input.cols()) {
    throw ContractViolation("jacobi_eigh: matrix is not square");
  }
  const Eigen::Index d = input.rows();
  if ((input - input.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, input.cwiseAbs().maxCoeff())) {
    throw ContractViolation("jacobi_eigh: matrix is not symmetric");
  }

  Eigen::MatrixXd a = input;
  Eigen::MatrixXd v;
  if (want_vectors) v = Eigen::MatrixXd::Identity(d, d);

  SymmetricEigen out;
  const double target = rel_tol * a.norm();
  double off = off_diagonal_norm(a);
  out.off_diagonal_history.push_back(off);

  while (off > target) {
    if (out.sweeps == max_sweeps) {
      throw NumericalError("jacobi_eigh: no convergence after " + std::to_string(max_sweeps) +
                           " sweeps (off-diagonal " + std::to_string(off) + ")");
    }
    for (Eigen::Index p = 0; p + 1 < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rotation already negligible at working precision.
        if (std::abs(apq) < std::numeric_limits<double>::epsilon() * 1e-3 *
                                std::sqrt(std::abs(app * aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // A <- J^T A J with J the (p, q) Givens rotation.
        double* colp = a.col(p).data();
        double* colq = a.col(q).data();
        for (Eigen::Index i = 0; i < d; ++i) {
          const double x = colp[i];
          const double y = colq[i];
          colp[i] = c * x - s * y;
          colq[i] = s * x + c * y;
        }
        for (Eigen::Index j = 0; j < d; ++j) {
          const double x = a(p, j);
          const double y = a(q, j);
          a(p, j) = c * x - s * y;
          a(q, j) = s * x + c * y;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;

        if (want_vectors) {
          double* vp = v.col(p).data();
          double* vq = v.col(q).data();
          for (Eigen::Index i = 0; i < d; ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - s * y;
            vq[i] = s * x + c * y;
          }
        }
      }
    }
    ++out.sweeps;
    off = off_diagonal_norm(a);
    out.off_diagonal_history.push_back(off);
  }

  const Eigen::VectorXd diag = a.diagonal();
  const auto order = descending_order(diag);
  out.values.resize(d);
  if (want_vectors) out.vectors.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values[i] = diag[order[static_cast<std::size_t>(i)]];
    if (want_vectors) out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

SmallSvd jacobi_svd(const Eigen::MatrixXd& m, int max_sweeps) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index k = m.cols();
  if (rows < k) throw ContractViolation("jacobi_svd: need rows >= cols");

  Eigen::MatrixXd u = m;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(k, k);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  const double tol = eps * static_cast<double>(std::max<Eigen::Index>(rows, 1));
  const double floor = eps * eps * std::max(m.squaredNorm(), std::numeric_limits<double>::min());

  bool rotated = true;
  int sweep = 0;
  while (rotated) {
    if (sweep++ == max_sweeps) throw NumericalError("jacobi_svd: no convergence");
    rotated = false;
    for (Eigen::Index p = 0; p + 1 < k; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        // Columns already orthogonal to working precision, or numerically zero.
        if (alpha <= floor || beta <= floor) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double x = u(i, p);
          const double y = u(i, q);
          u(i, p) = c * x - s * y;
          u(i, q) = s * x + c * y;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          const double x = v(i, p);
          const double y = v(i, q);
          v(i, p) = c * x - s * y;
          v(i, q) = s * x + c * y;
        }
      }
    }
  }

  Eigen::VectorXd sigma(k);
  for (Eigen::Index j = 0; j < k; ++j) sigma[j] = u.col(j).norm();
  const auto order = descending_order(sigma);

  SmallSvd out;
  out.u.resize(rows, k);
  out.s.resize(k);
  out.v.resize(k, k);
  const double smax = k > 0 ? sigma[order[0]] : 0.0;
  const double tiny = std::max(smax, 1.0) * eps * static_cast<double>(rows);
  std::vector<bool> ready(static_cast<std::size_t>(k), false);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.s[j] = sigma[src];
    out.v.col(j) = v.col(src);
    if (sigma[src] > tiny) {
      out.u.col(j) = u.col(src) / sigma[src];
      ready[static_cast<std::size_t>(j)] = true;
    }
  }

  // Complete U for (near-)zero singular values by Gram-Schmidt on unit vectors.
  Eigen::Index basis = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (ready[static_cast<std::size_t>(j)]) continue;
    for (; basis < rows; ++basis) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(rows, basis);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index c = 0; c < k; ++c) {
          if (ready[static_cast<std::size_t>(c)]) e -= out.u.col(c).dot(e) * out.u.col(c);
        }
      }
      const double norm = e.norm();
      if (norm > 0.5) {
        out.u.col(j) = e / norm;
        ready[static_cast<std::size_t>(j)] = true;
        ++basis;
        break;
      }
    }
  }
  return out;
}

}  // namespace vrpca
