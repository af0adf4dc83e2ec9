#include "vrpca/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/init.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

namespace {

using Clock = std::chrono::steady_clock;

// Column access plus the exact operator A for the unmodified data set.
class PlainSource {
 public:
  explicit PlainSource(const DataMatrix& x) : x_(x) {}
  Eigen::Index n() const { return x_.n(); }
  Eigen::Index d() const { return x_.d(); }
  const double* column(Eigen::Index i, Vector& /*scratch*/) const { return x_.column(i).data(); }
  Matrix apply(const Matrix& w, Matrix& projections) const {
    return covariance_apply(x_, w, projections);
  }

 private:
  const DataMatrix& x_;
};

// Columns projected onto the orthogonal complement of `found` (P = I - V V^T),
// so the operator is P A P. Nothing d×n is materialized.
class DeflatedSource {
 public:
  DeflatedSource(const DataMatrix& x, Matrix found) : x_(x), v_(std::move(found)) {}
  Eigen::Index n() const { return x_.n(); }
  Eigen::Index d() const { return x_.d(); }
  const double* column(Eigen::Index i, Vector& scratch) const {
    scratch = x_.column(i);
    scratch -= v_ * (v_.transpose() * scratch);
    return scratch.data();
  }
  Matrix apply(const Matrix& w, Matrix& projections) const {
    const Matrix pw = w - v_ * (v_.transpose() * w);
    Matrix out = covariance_apply(x_, pw, projections);
    out -= v_ * (v_.transpose() * out);
    return out;
  }

 private:
  const DataMatrix& x_;
  Matrix v_;
};

template <class Source>
class TraceRecorder {
 public:
  TraceRecorder(const Source& source, const std::optional<OrthonormalFrame>& reference,
                bool record_time)
      : source_(source), reference_(reference), record_time_(record_time), start_(Clock::now()) {}

  const TraceRecord& record(int epoch, std::int64_t iter, const Matrix& w, std::uint64_t samples,
                            bool boundary) {
    TraceRecord rec;
    rec.epoch = epoch;
    rec.iter = iter;
    rec.samples = samples;
    rec.boundary = boundary;
    if (reference_) rec.potential = potential(reference_->matrix(), w);
    Matrix scratch;
    const Matrix aw = source_.apply(w, scratch);
    rec.residual = (aw - w * (w.transpose() * aw)).norm();
    if (record_time_) rec.elapsed_s = std::chrono::duration<double>(Clock::now() - start_).count();
    trace_.records.push_back(rec);
    return trace_.records.back();
  }

  // The final frame is already orthonormal; avoid renormalizing so callers see
  // exactly the last iterate.
  ConvergenceTrace finish_exact(OrthonormalFrame w) {
    trace_.final_frame = std::move(w);
    return std::move(trace_);
  }

 private:
  const Source& source_;
  const std::optional<OrthonormalFrame>& reference_;
  bool record_time_;
  Clock::time_point start_;
  ConvergenceTrace trace_;
};

bool reached(const TraceRecord& rec, double epsilon) {
  const double metric = rec.potential ? *rec.potential : rec.residual;
  return metric <= epsilon;
}

std::int64_t trace_stride(std::int64_t m) { return std::max<std::int64_t>(1, m / 10); }

void check_reference(const std::optional<OrthonormalFrame>& reference, Eigen::Index d,
                     Eigen::Index k) {
  if (reference && (reference->d() != d || reference->k() != k)) {
    throw ContractViolation("reference frame shape does not match the iterate");
  }
}

// Normalization used by the vector solver; arithmetic matches polar_normalize for k = 1.
Matrix normalize_vector(const Matrix& wp) {
  const double sq = wp.col(0).squaredNorm();
  const double norm = std::sqrt(sq);
  if (!(norm >= 1e-12)) {
    throw DegenerateIterate("degenerate iterate: ||w'|| = " + std::to_string(norm), sq);
  }
  return wp / norm;
}

template <class Source>
ConvergenceTrace run_vector(const Source& source, const OrthonormalFrame& w0,
                            const SolverConfig& cfg,
                            const std::optional<OrthonormalFrame>& reference) {
  const Eigen::Index d = source.d();
  const Eigen::Index n = source.n();
  if (w0.k() != 1 || w0.d() != d) throw ContractViolation("vrpca_vector: w0 must be d×1");
  check_reference(reference, d, 1);

  CounterRng rng(cfg.seed);
  TraceRecorder<Source> recorder(source, reference, cfg.record_time);
  const std::int64_t stride = trace_stride(cfg.m);

  Matrix w = w0.matrix();
  Matrix wp(d, 1);
  Matrix projections;
  Vector scratch(d);
  std::uint64_t samples = 0;
  recorder.record(0, 0, w, samples, true);

  for (int s = 1; s <= cfg.epochs; ++s) {
    const Matrix anchor = w;
    const Matrix u = source.apply(anchor, projections);
    samples += static_cast<std::uint64_t>(n);
    for (std::int64_t t = 1; t <= cfg.m; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      ++samples;
      const double* xi = source.column(i, scratch);
      double dot = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) dot += xi[j] * w(j, 0);
      const double coef = dot - projections(i, 0);
      for (Eigen::Index j = 0; j < d; ++j) wp(j, 0) = w(j, 0) + cfg.eta * (xi[j] * coef + u(j, 0));
      w = normalize_vector(wp);
      if (t < cfg.m && t % stride == 0) recorder.record(s, t, w, samples, false);
    }
    const TraceRecord& rec = recorder.record(s, cfg.m, w, samples, true);
    if (cfg.early_exit && reached(rec, cfg.epsilon)) break;
  }
  return recorder.finish_exact(OrthonormalFrame(w));
}

}  // namespace

void SolverConfig::validate(Eigen::Index d) const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ContractViolation("SolverConfig: eta must be >= 0");
  if (m < 1) throw ContractViolation("SolverConfig: m must be >= 1");
  if (epochs < 0) throw ContractViolation("SolverConfig: epochs must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("SolverConfig: delta must lie in (0, 1)");
  if (k < 1 || k > d) throw ContractViolation("SolverConfig: need 1 <= k <= d");
}

std::vector<double> ConvergenceTrace::boundary_potentials() const {
  std::vector<double> out;
  for (const auto& rec : records) {
    if (!rec.boundary) continue;
    if (!rec.potential) throw ContractViolation("trace has no potentials (no reference frame)");
    out.push_back(*rec.potential);
  }
  return out;
}

ConvergenceTrace vrpca_vector(const DataMatrix& x, const OrthonormalFrame& w0,
                              const SolverConfig& cfg,
                              const std::optional<OrthonormalFrame>& reference) {
  cfg.validate(x.d());
  if (cfg.k != 1) throw ContractViolation("vrpca_vector: cfg.k must be 1");
  return run_vector(PlainSource(x), w0, cfg, reference);
}

ConvergenceTrace vrpca_block(const DataMatrix& x, const OrthonormalFrame& w0,
                             const SolverConfig& cfg,
                             const std::optional<OrthonormalFrame>& reference) {
  cfg.validate(x.d());
  const Eigen::Index d = x.d();
  const Eigen::Index n = x.n();
  const Eigen::Index k = cfg.k;
  if (w0.k() != k || w0.d() != d) throw ContractViolation("vrpca_block: W0 must be d×k");
  check_reference(reference, d, k);

  const PlainSource source(x);
  CounterRng rng(cfg.seed);
  TraceRecorder<PlainSource> recorder(source, reference, cfg.record_time);
  const std::int64_t stride = trace_stride(cfg.m);

  OrthonormalFrame w = w0;
  Matrix wp(d, k);
  Matrix projections;
  Matrix ub(d, k);
  Vector xw(k);
  Vector anchor_b(k);
  std::uint64_t samples = 0;
  recorder.record(0, 0, w.matrix(), samples, true);

  for (int s = 1; s <= cfg.epochs; ++s) {
    const OrthonormalFrame anchor = w;
    const Matrix u = source.apply(anchor.matrix(), projections);
    samples += static_cast<std::uint64_t>(n);
    for (std::int64_t t = 1; t <= cfg.m; ++t) {
      const Matrix& cur = w.matrix();
      const Matrix* ub_ptr = &u;
      Matrix b;
      if (cfg.use_rotation) {
        b = procrustes_rotation(cur, anchor.matrix()).matrix();
        ub.noalias() = u.lazyProduct(b);
        ub_ptr = &ub;
      }
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      ++samples;
      const double* xi = x.column(i).data();
      for (Eigen::Index c = 0; c < k; ++c) {
        double dot = 0.0;
        const double* wc = cur.col(c).data();
        for (Eigen::Index j = 0; j < d; ++j) dot += xi[j] * wc[j];
        xw[c] = dot;
        if (cfg.use_rotation) {
          double acc = 0.0;
          for (Eigen::Index l = 0; l < k; ++l) acc += projections(i, l) * b(l, c);
          anchor_b[c] = acc;
        } else {
          anchor_b[c] = projections(i, c);
        }
      }
      for (Eigen::Index c = 0; c < k; ++c) {
        const double coef = xw[c] - anchor_b[c];
        for (Eigen::Index j = 0; j < d; ++j) {
          wp(j, c) = cur(j, c) + cfg.eta * (xi[j] * coef + (*ub_ptr)(j, c));
        }
      }
      w = polar_normalize(wp);
#ifndef NDEBUG
      if (w.orthonormality_error() > OrthonormalFrame::kOrthonormalTol) {
        throw NumericalError("vrpca_block: iterate lost orthonormality");
      }
#endif
      if (t < cfg.m && t % stride == 0) recorder.record(s, t, w.matrix(), samples, false);
    }
    const TraceRecord& rec = recorder.record(s, cfg.m, w.matrix(), samples, true);
    if (cfg.early_exit && reached(rec, cfg.epsilon)) break;
  }
  return recorder.finish_exact(std::move(w));
}

StepParameters select_parameters(double lambda_hat, double r, Eigen::Index k, double delta,
                                 const StepRuleConstants& constants) {
  if (!(lambda_hat > 0.0)) {
    throw ContractViolation(
        "select_parameters: eigengap estimate must be positive; run burn_in and estimate it "
        "from the oracle spectrum (dense_eigh) first");
  }
  if (!(r > 0.0)) throw ContractViolation("select_parameters: r must be positive");
  if (k < 1) throw ContractViolation("select_parameters: k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("select_parameters: delta in (0, 1)");

  const double c = constants.c;
  const double c2 = constants.c_double_prime;
  const double log_term = std::log(2.0 / delta);
  const double kd = static_cast<double>(k);
  const double d2 = delta * delta;
  const double a = std::min({c, c2 / (4.0 * d2 * c * kd * log_term),
                             (1.0 / (4.0 * d2 * c)) * std::pow(c2 / (kd * log_term), 2)});
  const double eta = a * d2 * lambda_hat / (r * r);
  const double m = std::ceil(constants.c_prime * log_term / (eta * lambda_hat));
  return StepParameters{eta, static_cast<std::int64_t>(std::max(1.0, m))};
}

int default_epochs(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ContractViolation("default_epochs: epsilon and delta must lie in (0, 1)");
  }
  return static_cast<int>(std::ceil(std::log(1.0 / epsilon) / std::log(2.0 / delta)));
}

double burn_in_step_size(double lambda, double zeta, double delta, double r,
                         const BurnInConstants& constants) {
  const double log_term = std::log(2.0 / delta);
  return constants.c * delta * delta * lambda * zeta * zeta * zeta / (r * r * log_term * log_term);
}

std::int64_t burn_in_iterations(double eta, double lambda, double zeta, double delta,
                                const BurnInConstants& constants) {
  const double t = std::floor(constants.c_prime * std::log(2.0 / delta) / (eta * lambda * zeta));
  return static_cast<std::int64_t>(std::min(t, 9.0e15));
}

BurnInResult burn_in(const DataMatrix& x, const OrthonormalFrame& w0, const BurnInOptions& opts) {
  if (w0.k() != 1 || w0.d() != x.d()) throw ContractViolation("burn_in: w0 must be d×1");
  if (!(opts.zeta > 0.0 && opts.zeta <= 1.0)) throw ContractViolation("burn_in: zeta in (0, 1]");
  if (!(opts.delta > 0.0 && opts.delta < 0.5)) throw ContractViolation("burn_in: delta in (0, 1/2)");
  if (!(opts.lambda > 0.0)) throw ContractViolation("burn_in: lambda must be positive");
  if (!(opts.eta_scale > 0.0)) throw ContractViolation("burn_in: eta_scale must be positive");
  check_reference(opts.reference, x.d(), 1);

  const double eta =
      opts.eta_scale * burn_in_step_size(opts.lambda, opts.zeta, opts.delta, x.r(), opts.constants);
  const std::int64_t rule_t =
      burn_in_iterations(eta, opts.lambda, opts.zeta, opts.delta, opts.constants);
  const std::int64_t budget = rule_t > 9.0e14 ? rule_t : 10 * rule_t;
  const std::int64_t m = opts.epoch_length > 0 ? opts.epoch_length : x.n();
  const Eigen::Index d = x.d();
  const Eigen::Index n = x.n();

  const PlainSource source(x);
  TraceRecorder<PlainSource> recorder(source, opts.reference, opts.record_time);
  const auto done = [&](const Matrix& w) {
    if (!opts.reference) return false;
    const double c = opts.reference->matrix().col(0).dot(w.col(0));
    return 1.0 - c * c <= 0.5;
  };

  Matrix w = w0.matrix();
  std::uint64_t samples = 0;
  recorder.record(0, 0, w, samples, true);
  if (done(w)) {
    return BurnInResult{w0, 0, eta, rule_t, recorder.finish_exact(w0)};
  }

  CounterRng rng(opts.seed);
  Matrix wp(d, 1);
  Matrix projections;
  std::int64_t iterations = 0;
  double previous_q = -1.0;
  int epoch = 0;
  while (iterations < budget) {
    ++epoch;
    const Matrix anchor = w;
    const Matrix u = source.apply(anchor, projections);
    samples += static_cast<std::uint64_t>(n);
    const double q = anchor.col(0).dot(u.col(0));
    if (!opts.reference && previous_q >= 0.0 &&
        std::abs(q - previous_q) <= opts.plateau_rel_tol * std::abs(q)) {
      recorder.record(epoch - 1, m, w, samples, true);
      return BurnInResult{OrthonormalFrame(w), iterations, eta, rule_t,
                          recorder.finish_exact(OrthonormalFrame(w))};
    }
    previous_q = q;
    const std::int64_t steps = std::min(m, budget - iterations);
    for (std::int64_t t = 1; t <= steps; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      ++samples;
      ++iterations;
      const double* xi = x.column(i).data();
      double dot = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) dot += xi[j] * w(j, 0);
      const double coef = dot - projections(i, 0);
      for (Eigen::Index j = 0; j < d; ++j) wp(j, 0) = w(j, 0) + eta * (xi[j] * coef + u(j, 0));
      w = normalize_vector(wp);
      if (done(w)) {
        recorder.record(epoch, t, w, samples, true);
        return BurnInResult{OrthonormalFrame(w), iterations, eta, rule_t,
                            recorder.finish_exact(OrthonormalFrame(w))};
      }
    }
    recorder.record(epoch, steps, w, samples, true);
  }
  throw NonConvergence("burn_in: no convergence within " + std::to_string(budget) +
                           " iterations (10x the rule's T = " + std::to_string(rule_t) + ")",
                       recorder.finish_exact(OrthonormalFrame(w)));
}

ConvergenceTrace oja_baseline(const DataMatrix& x, const OrthonormalFrame& w0,
                              const OjaSchedule& schedule, std::int64_t iterations,
                              std::uint64_t seed, const std::optional<OrthonormalFrame>& reference,
                              bool record_time) {
  if (w0.k() != 1 || w0.d() != x.d()) throw ContractViolation("oja_baseline: w0 must be d×1");
  if (iterations < 0) throw ContractViolation("oja_baseline: negative iteration count");
  if (!(schedule.c >= 0.0)) throw ContractViolation("oja_baseline: schedule constant must be >= 0");
  check_reference(reference, x.d(), 1);

  const Eigen::Index d = x.d();
  const PlainSource source(x);
  TraceRecorder<PlainSource> recorder(source, reference, record_time);
  CounterRng rng(seed);
  const std::int64_t stride = trace_stride(iterations);

  Matrix w = w0.matrix();
  Matrix wp(d, 1);
  recorder.record(0, 0, w, 0, true);
  for (std::int64_t t = 1; t <= iterations; ++t) {
    const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(x.n())));
    const double* xi = x.column(i).data();
    double dot = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) dot += xi[j] * w(j, 0);
    const double step = schedule.c / static_cast<double>(t) * dot;
    for (Eigen::Index j = 0; j < d; ++j) wp(j, 0) = w(j, 0) + step * xi[j];
    w = normalize_vector(wp);
    if (t == iterations) {
      recorder.record(1, t, w, static_cast<std::uint64_t>(t), true);
    } else if (t % stride == 0) {
      recorder.record(1, t, w, static_cast<std::uint64_t>(t), false);
    }
  }
  return recorder.finish_exact(OrthonormalFrame(w));
}

ConvergenceTrace orthogonal_iteration(const DataMatrix& x, const OrthonormalFrame& w0, int sweeps,
                                      const std::optional<OrthonormalFrame>& reference,
                                      bool record_time) {
  if (w0.d() != x.d()) throw ContractViolation("orthogonal_iteration: W0 has wrong dimension");
  if (sweeps < 0) throw ContractViolation("orthogonal_iteration: negative sweep count");
  check_reference(reference, x.d(), w0.k());

  const PlainSource source(x);
  TraceRecorder<PlainSource> recorder(source, reference, record_time);
  OrthonormalFrame w = w0;
  std::uint64_t samples = 0;
  recorder.record(0, 0, w.matrix(), samples, true);
  for (int s = 1; s <= sweeps; ++s) {
    w = polar_normalize(covariance_apply(x, w.matrix()));
    samples += static_cast<std::uint64_t>(x.n());
    recorder.record(s, 1, w.matrix(), samples, true);
  }
  return recorder.finish_exact(std::move(w));
}

std::uint64_t deflation_seed(std::uint64_t seed, Eigen::Index component) {
  return CounterRng(seed).substream(0xdef1a7e0ULL + static_cast<std::uint64_t>(component)).next_u64();
}

DeflationResult deflation_solve(const DataMatrix& x, Eigen::Index k, const SolverConfig& cfg) {
  SolverConfig one = cfg;
  one.k = 1;
  one.validate(x.d());
  if (k < 1 || k > x.d()) throw ContractViolation("deflation_solve: need 1 <= k <= d");

  const Eigen::Index d = x.d();
  Matrix found(d, 0);
  DeflationResult result{OrthonormalFrame(Matrix::Identity(d, 1)), {}, {}, {}};
  for (Eigen::Index j = 0; j < k; ++j) {
    const std::uint64_t sub = deflation_seed(cfg.seed, j);
    one.seed = j == 0 ? cfg.seed : sub;
    Matrix start = gaussian_init(d, 1, sub).matrix();
    ConvergenceTrace trace;
    if (j == 0) {
      trace = run_vector(PlainSource(x), OrthonormalFrame(start), one, std::nullopt);
    } else {
      start -= found * (found.transpose() * start);
      const DeflatedSource source(x, found);
      trace = run_vector(source, polar_normalize(start), one, std::nullopt);
    }
    Matrix v = trace.final_frame->matrix();
    if (j > 0) {
      // Remove drift back into the found subspace before appending.
      v -= found * (found.transpose() * v);
      v = polar_normalize(v).matrix();
    }
    const double estimate = v.col(0).dot(covariance_apply(x, v).col(0));
    if (!result.eigenvalue_estimates.empty() &&
        std::abs(result.eigenvalue_estimates.back() - estimate) < kDeflationGapWarning) {
      result.warnings.push_back("components " + std::to_string(j) + " and " +
                                std::to_string(j + 1) + " have estimated eigenvalues within " +
                                std::to_string(kDeflationGapWarning) +
                                "; deflation needs a positive gap between all top-k eigenvalues");
    }
    result.eigenvalue_estimates.push_back(estimate);
    found.conservativeResize(d, j + 1);
    found.col(j) = v.col(0);
    result.traces.push_back(std::move(trace));
  }
  result.frame = OrthonormalFrame(std::move(found));
  return result;
}

}  // namespace vrpca
