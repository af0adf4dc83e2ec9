#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vrpca/init.hpp"
#include "vrpca/oracle.hpp"
#include "vrpca/solvers.hpp"

namespace vrpca {

enum class SolverKind { vector, block, deflation, oja, orthogonal };

SolverKind parse_solver(const std::string& name);
const char* solver_name(SolverKind kind);

/// Everything needed to reproduce a run. Field names match the JSON config
/// keys and the CLI flags.
struct ExperimentConfig {
  // Exactly one source: a dataset file or an inline spectrum to synthesize.
  std::optional<std::string> dataset;
  std::string format = "csv";
  std::optional<std::vector<double>> spectrum;
  std::int64_t synth_n = 0;  // defaults to 10 d
  std::uint64_t synth_seed = 1;

  SolverKind solver = SolverKind::vector;
  Eigen::Index k = 1;
  std::optional<double> eta;
  std::optional<std::int64_t> m;
  int epochs = 10;
  double delta = 0.1;
  double epsilon = 1e-10;
  bool use_rotation = true;
  bool early_exit = false;
  std::optional<double> lambda_hat;
  StepRuleConstants constants;

  InitMethod init = InitMethod::gaussian;
  bool burn_in = false;
  std::optional<double> burn_in_zeta;
  BurnInConstants burn_in_constants;
  bool rescale = false;
  bool verify = true;

  double oja_c = 1.0;
  std::int64_t oja_iterations = 0;  // 0: match the VR-PCA sample budget

  std::vector<std::uint64_t> seeds{1};
  bool record_time = true;

  std::optional<std::string> trace_path;
  std::optional<std::string> report_path;
  std::optional<std::string> frame_path;

  /// Throws ContractViolation unless exactly one dataset source is set and seeds are distinct.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Cost model d k (n + r^2 k^3 / lambda^2) log(1/epsilon), constants dropped.
double runtime_model(Eigen::Index d, Eigen::Index k, Eigen::Index n, double r, double lambda,
                     double epsilon);

struct RunReport {
  std::uint64_t seed = 0;
  std::string solver;
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  double realized_r = 0.0;
  double rescale_factor = 1.0;
  std::optional<double> true_eigengap;
  std::optional<double> eigengap_used;
  std::optional<double> init_alignment;
  std::optional<std::int64_t> burn_in_iterations;
  double eta = 0.0;
  std::int64_t m = 0;
  int epochs = 0;
  std::vector<double> epoch_potentials;
  std::optional<double> final_potential;
  std::optional<double> final_residual;
  std::uint64_t samples = 0;
  double elapsed_s = 0.0;
  std::optional<double> runtime_model;
  std::string status = "ok";  // ok | non_convergence
  std::vector<std::string> messages;
};

nlohmann::json report_to_json(const RunReport& report);

/// Data plus optional oracle results, built once and shared (read-only) by all seeds.
struct ExperimentContext {
  DataMatrix data;
  double rescale_factor = 1.0;
  std::optional<Spectrum> spectrum;
};

ExperimentContext prepare_context(const ExperimentConfig& cfg);

struct RunOutput {
  RunReport report;
  ConvergenceTrace trace;
};

/// init -> optional burn-in -> parameter selection -> solver -> verification,
/// for one seed. Non-convergence lands in report.status; DegenerateIterate propagates.
RunOutput run_single(const ExperimentConfig& cfg, const ExperimentContext& ctx, std::uint64_t seed);

/// All seeds (concurrently), writing trace/report/frame files when paths are set.
std::vector<RunReport> run_experiment(const ExperimentConfig& cfg);

/// One JSON object per line: epoch, iter, potential (null without reference),
/// residual, samples, elapsed_s.
void write_trace_jsonl(std::ostream& out, const ConvergenceTrace& trace);
std::vector<TraceRecord> read_trace_jsonl(std::istream& in);

/// Per-seed output path: unchanged for a single seed, otherwise "<stem>.seed<N><ext>".
std::string seeded_path(const std::string& path, std::uint64_t seed, bool multiple);

/// VR-PCA vs Oja vs orthogonal iteration at matched sample budgets, plus the
/// k = 1 block-vs-vector equivalence row and the power-method rate check.
nlohmann::json compare_baselines(const ExperimentConfig& cfg);

struct GeometryOptions {
  double lambda = 0.2;
  double eps = 0.1;
  std::int64_t determinant_samples = 100;
  std::int64_t probe_samples = 10000;
  Eigen::Index probe_dim = 10;
  std::uint64_t seed = 1;
};

/// Determinant sweep on diag(1, 0), convexity-region probe, and the tightness numbers.
nlohmann::json geometry_report(const GeometryOptions& opts);

}  // namespace vrpca
