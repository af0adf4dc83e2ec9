#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrpca/matrix_core.hpp"

namespace vrpca {

/// Constants in the step-size / epoch-length rule. The theory only says
/// "positive numerical constants"; these defaults come from a tuning pass on
/// the standard synthetic instance and are engineering choices.
struct StepRuleConstants {
  double c = 1.0;
  double c_prime = 0.5;
  double c_double_prime = 1.0;
};

/// Constants for the burn-in step size and iteration count (see burn_in).
struct BurnInConstants {
  double c = 1.0e5;
  double c_prime = 1.0;
};

struct SolverConfig {
  Eigen::Index k = 1;
  double eta = 0.0;
  std::int64_t m = 1;
  int epochs = 1;
  std::uint64_t seed = 0;
  double delta = 0.1;
  double epsilon = 1e-10;
  bool use_rotation = true;
  /// Stop at the first epoch boundary whose metric (potential when a reference
  /// is available, Rayleigh residual otherwise) is <= epsilon.
  bool early_exit = false;
  /// Fill elapsed_s in trace records; off makes traces bit-reproducible.
  bool record_time = true;

  /// Throws ContractViolation unless eta >= 0, m >= 1, epochs >= 0,
  /// 0 < delta < 1 and 1 <= k <= d.
  void validate(Eigen::Index d) const;
};

struct TraceRecord {
  int epoch = 0;          // 0 for the initial state, s during/after epoch s
  std::int64_t iter = 0;  // inner iteration within the epoch; m at the boundary
  std::optional<double> potential;
  double residual = 0.0;
  std::uint64_t samples = 0;  // columns touched so far (full passes count n)
  double elapsed_s = 0.0;
  bool boundary = false;

  bool operator==(const TraceRecord&) const = default;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  std::optional<OrthonormalFrame> final_frame;

  /// Potentials at the initial state and every epoch boundary (requires a reference).
  std::vector<double> boundary_potentials() const;
  const TraceRecord& last() const { return records.back(); }
};

/// Vector VR-PCA. Each epoch takes one exact pass u = A w~ and then m stochastic
/// steps w' = w + eta (x_i (x_i^T w - x_i^T w~) + u), normalized, with i drawn
/// uniformly with replacement from a stream seeded by cfg.seed.
ConvergenceTrace vrpca_vector(const DataMatrix& x, const OrthonormalFrame& w0,
                              const SolverConfig& cfg,
                              const std::optional<OrthonormalFrame>& reference = std::nullopt);

/// Block VR-PCA. As vrpca_vector with d×k iterates: the anchor W~ and U~ are
/// aligned with the current iterate through the Procrustes rotation
/// B = argmin_{B^T B = I} ||W - W~ B||_F (recomputed every step, or B = I when
/// cfg.use_rotation is false), and normalization is polar_normalize.
/// With k = 1 the iterates match vrpca_vector bit for bit.
ConvergenceTrace vrpca_block(const DataMatrix& x, const OrthonormalFrame& w0,
                             const SolverConfig& cfg,
                             const std::optional<OrthonormalFrame>& reference = std::nullopt);

struct StepParameters {
  double eta;
  std::int64_t m;
};

/// eta = a delta^2 lambda / r^2 with
/// a = min{c, c'' / (4 delta^2 c k L), (1 / (4 delta^2 c)) (c'' / (k L))^2}, L = log(2/delta),
/// and m = ceil(c' L / (eta lambda)).
StepParameters select_parameters(double lambda_hat, double r, Eigen::Index k, double delta,
                                 const StepRuleConstants& constants = {});

/// Number of epochs after which the theory guarantees potential <= epsilon:
/// ceil(log(1/epsilon) / log(2/delta)).
int default_epochs(double epsilon, double delta);

struct BurnInOptions {
  double lambda = 0.0;  // eigengap estimate
  double zeta = 0.0;    // caller's lower bound on <v_1, w_0>^2, in (0, 1]
  double delta = 0.1;   // in (0, 1/2)
  BurnInConstants constants;
  /// Multiplies the rule's step size; 1 follows the rule.
  double eta_scale = 1.0;
  /// Inner iterations per anchor refresh; 0 means n.
  std::int64_t epoch_length = 0;
  std::uint64_t seed = 0;
  /// v_1 from the oracle. Without it the run stops when the Rayleigh quotient plateaus.
  std::optional<OrthonormalFrame> reference;
  double plateau_rel_tol = 1e-9;
  bool record_time = true;
};

struct BurnInResult {
  OrthonormalFrame frame;
  std::int64_t iterations = 0;
  double eta = 0.0;
  std::int64_t rule_iterations = 0;  // the rule's T; the budget is 10 T
  ConvergenceTrace trace;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, ConvergenceTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const ConvergenceTrace& trace() const noexcept { return trace_; }

 private:
  ConvergenceTrace trace_;
};

/// eta = c delta^2 lambda zeta^3 / (r^2 log^2(2/delta))
double burn_in_step_size(double lambda, double zeta, double delta, double r,
                         const BurnInConstants& constants = {});

/// T = floor(c' log(2/delta) / (eta lambda zeta))
std::int64_t burn_in_iterations(double eta, double lambda, double zeta, double delta,
                                const BurnInConstants& constants = {});

/// Runs vector VR-PCA steps with the burn-in step size until 1 - <v_1, w>^2 <= 1/2
/// (or the Rayleigh quotient plateaus when no reference is given). Returns
/// immediately when w0 already qualifies. Throws NonConvergence after 10 T steps.
BurnInResult burn_in(const DataMatrix& x, const OrthonormalFrame& w0, const BurnInOptions& opts);

struct OjaSchedule {
  double c = 1.0;  // eta_t = c / t
};

/// Plain stochastic power steps w' = w + eta_t x_i x_i^T w, normalized.
ConvergenceTrace oja_baseline(const DataMatrix& x, const OrthonormalFrame& w0,
                              const OjaSchedule& schedule, std::int64_t iterations,
                              std::uint64_t seed,
                              const std::optional<OrthonormalFrame>& reference = std::nullopt,
                              bool record_time = true);

/// W <- polar_normalize(A W), one record per sweep.
ConvergenceTrace orthogonal_iteration(const DataMatrix& x, const OrthonormalFrame& w0, int sweeps,
                                      const std::optional<OrthonormalFrame>& reference = std::nullopt,
                                      bool record_time = true);

struct DeflationResult {
  OrthonormalFrame frame;
  std::vector<double> eigenvalue_estimates;
  std::vector<std::string> warnings;
  std::vector<ConvergenceTrace> traces;
};

inline constexpr double kDeflationGapWarning = 1e-3;

/// Recovers k leading eigenvectors one at a time with vector VR-PCA, projecting
/// each sampled column onto the complement of the vectors already found.
/// Component j starts from gaussian_init(d, 1, deflation_seed(cfg.seed, j)) and
/// samples from deflation_seed(cfg.seed, j) too, except that component 0 uses
/// cfg.seed for sampling so that k = 1 reproduces vrpca_vector exactly.
DeflationResult deflation_solve(const DataMatrix& x, Eigen::Index k, const SolverConfig& cfg);

std::uint64_t deflation_seed(std::uint64_t seed, Eigen::Index component);

}  // namespace vrpca
