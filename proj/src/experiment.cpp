#include "vrpca/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "vrpca/dataset_io.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/rayleigh_geometry.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

InitMethod parse_init(const std::string& name) {
  if (name == "gaussian") return InitMethod::gaussian;
  if (name == "power" || name == "gaussian_plus_power") return InitMethod::gaussian_plus_power;
  throw ParseError("unknown init method '" + name + "' (expected gaussian or power)", 0);
}

const char* init_name(InitMethod m) {
  return m == InitMethod::gaussian ? "gaussian" : "power";
}

template <class T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::uint64_t init_seed(std::uint64_t seed) { return CounterRng(seed).substream(1).next_u64(); }
std::uint64_t burn_in_seed(std::uint64_t seed) { return CounterRng(seed).substream(2).next_u64(); }

// Appends `extra`, shifting its epochs so numbering keeps increasing.
void append_trace(ConvergenceTrace& into, const ConvergenceTrace& extra, std::uint64_t sample_offset) {
  const int epoch_offset = into.records.empty() ? 0 : into.records.back().epoch + 1;
  for (TraceRecord rec : extra.records) {
    rec.epoch += epoch_offset;
    rec.samples += sample_offset;
    into.records.push_back(rec);
  }
}

}  // namespace

SolverKind parse_solver(const std::string& name) {
  if (name == "vector" || name == "vrpca") return SolverKind::vector;
  if (name == "block") return SolverKind::block;
  if (name == "deflation") return SolverKind::deflation;
  if (name == "oja") return SolverKind::oja;
  if (name == "orthogonal") return SolverKind::orthogonal;
  throw ParseError("unknown solver '" + name +
                       "' (expected vector, block, deflation, oja or orthogonal)",
                   0);
}

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::vector: return "vector";
    case SolverKind::block: return "block";
    case SolverKind::deflation: return "deflation";
    case SolverKind::oja: return "oja";
    case SolverKind::orthogonal: return "orthogonal";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (dataset.has_value() == spectrum.has_value()) {
    throw ContractViolation("config: set exactly one of 'dataset' and 'spectrum'");
  }
  if (seeds.empty()) throw ContractViolation("config: 'seeds' is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ContractViolation("config: seeds must be distinct");
  }
  if (k < 1) throw ContractViolation("config: k must be >= 1");
  if (epochs < 0) throw ContractViolation("config: epochs must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("config: delta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ContractViolation("config: epsilon must be positive");
  if (solver == SolverKind::vector && k != 1) {
    throw ContractViolation("config: the vector solver needs k = 1 (use block or deflation)");
  }
  if (solver == SolverKind::oja && k != 1) throw ContractViolation("config: oja needs k = 1");
}

ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> known{
      "dataset", "format", "spectrum", "synth_n", "synth_seed", "solver", "k", "eta", "m",
      "epochs", "delta", "epsilon", "use_rotation", "early_exit", "lambda_hat", "constants",
      "init", "burn_in", "burn_in_zeta", "burn_in_constants", "rescale", "verify", "oja_c",
      "oja_iterations", "seeds", "record_time", "trace_path", "report_path", "frame_path"};
  if (!j.is_object()) throw ParseError("config: expected a JSON object", 0);
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ParseError("config: unknown key '" + key + "'", 0);
  }
  ExperimentConfig cfg;
  try {
    cfg.dataset = opt_get<std::string>(j, "dataset");
    cfg.format = j.value("format", cfg.format);
    cfg.spectrum = opt_get<std::vector<double>>(j, "spectrum");
    cfg.synth_n = j.value("synth_n", cfg.synth_n);
    cfg.synth_seed = j.value("synth_seed", cfg.synth_seed);
    if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver").get<std::string>());
    cfg.k = j.value("k", cfg.k);
    cfg.eta = opt_get<double>(j, "eta");
    cfg.m = opt_get<std::int64_t>(j, "m");
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.use_rotation = j.value("use_rotation", cfg.use_rotation);
    cfg.early_exit = j.value("early_exit", cfg.early_exit);
    cfg.lambda_hat = opt_get<double>(j, "lambda_hat");
    if (j.contains("constants")) {
      const json& c = j.at("constants");
      cfg.constants.c = c.value("c", cfg.constants.c);
      cfg.constants.c_prime = c.value("c_prime", cfg.constants.c_prime);
      cfg.constants.c_double_prime = c.value("c_double_prime", cfg.constants.c_double_prime);
    }
    if (j.contains("init")) cfg.init = parse_init(j.at("init").get<std::string>());
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.burn_in_zeta = opt_get<double>(j, "burn_in_zeta");
    if (j.contains("burn_in_constants")) {
      const json& c = j.at("burn_in_constants");
      cfg.burn_in_constants.c = c.value("c", cfg.burn_in_constants.c);
      cfg.burn_in_constants.c_prime = c.value("c_prime", cfg.burn_in_constants.c_prime);
    }
    cfg.rescale = j.value("rescale", cfg.rescale);
    cfg.verify = j.value("verify", cfg.verify);
    cfg.oja_c = j.value("oja_c", cfg.oja_c);
    cfg.oja_iterations = j.value("oja_iterations", cfg.oja_iterations);
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.record_time = j.value("record_time", cfg.record_time);
    cfg.trace_path = opt_get<std::string>(j, "trace_path");
    cfg.report_path = opt_get<std::string>(j, "report_path");
    cfg.frame_path = opt_get<std::string>(j, "frame_path");
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["dataset"] = opt_json(cfg.dataset);
  j["format"] = cfg.format;
  j["spectrum"] = opt_json(cfg.spectrum);
  j["synth_n"] = cfg.synth_n;
  j["synth_seed"] = cfg.synth_seed;
  j["solver"] = solver_name(cfg.solver);
  j["k"] = cfg.k;
  j["eta"] = opt_json(cfg.eta);
  j["m"] = opt_json(cfg.m);
  j["epochs"] = cfg.epochs;
  j["delta"] = cfg.delta;
  j["epsilon"] = cfg.epsilon;
  j["use_rotation"] = cfg.use_rotation;
  j["early_exit"] = cfg.early_exit;
  j["lambda_hat"] = opt_json(cfg.lambda_hat);
  j["constants"] = {{"c", cfg.constants.c},
                    {"c_prime", cfg.constants.c_prime},
                    {"c_double_prime", cfg.constants.c_double_prime}};
  j["init"] = init_name(cfg.init);
  j["burn_in"] = cfg.burn_in;
  j["burn_in_zeta"] = opt_json(cfg.burn_in_zeta);
  j["burn_in_constants"] = {{"c", cfg.burn_in_constants.c},
                            {"c_prime", cfg.burn_in_constants.c_prime}};
  j["rescale"] = cfg.rescale;
  j["verify"] = cfg.verify;
  j["oja_c"] = cfg.oja_c;
  j["oja_iterations"] = cfg.oja_iterations;
  j["seeds"] = cfg.seeds;
  j["record_time"] = cfg.record_time;
  j["trace_path"] = opt_json(cfg.trace_path);
  j["report_path"] = opt_json(cfg.report_path);
  j["frame_path"] = opt_json(cfg.frame_path);
  return j;
}

double runtime_model(Eigen::Index d, Eigen::Index k, Eigen::Index n, double r, double lambda,
                     double epsilon) {
  if (!(lambda > 0.0) || !(epsilon > 0.0 && epsilon < 1.0)) {
    throw ContractViolation("runtime_model: need lambda > 0 and epsilon in (0, 1)");
  }
  const double kd = static_cast<double>(k);
  return static_cast<double>(d) * kd *
         (static_cast<double>(n) + r * r * kd * kd * kd / (lambda * lambda)) *
         std::log(1.0 / epsilon);
}

json report_to_json(const RunReport& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["solver"] = r.solver;
  j["d"] = r.d;
  j["n"] = r.n;
  j["k"] = r.k;
  j["realized_r"] = r.realized_r;
  j["rescale_factor"] = r.rescale_factor;
  j["true_eigengap"] = opt_json(r.true_eigengap);
  j["eigengap_used"] = opt_json(r.eigengap_used);
  j["init_alignment"] = opt_json(r.init_alignment);
  j["burn_in_iterations"] = opt_json(r.burn_in_iterations);
  j["eta"] = r.eta;
  j["m"] = r.m;
  j["epochs"] = r.epochs;
  j["epoch_potentials"] = r.epoch_potentials;
  j["final_potential"] = opt_json(r.final_potential);
  j["final_residual"] = opt_json(r.final_residual);
  j["samples"] = r.samples;
  j["elapsed_s"] = r.elapsed_s;
  j["runtime_model"] = opt_json(r.runtime_model);
  j["status"] = r.status;
  j["messages"] = r.messages;
  return json(j);
}

ExperimentContext prepare_context(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<DataMatrix> data;
  if (cfg.dataset) {
    data = load_dataset(*cfg.dataset, parse_format(cfg.format));
  } else {
    SpectrumSpec spec{*cfg.spectrum};
    const std::int64_t n = cfg.synth_n > 0 ? cfg.synth_n : 10 * spec.d();
    data = synthesize_dataset(spec, n, cfg.synth_seed);
  }
  ExperimentContext ctx{std::move(*data), 1.0, std::nullopt};
  if (cfg.rescale) {
    RescaledData rescaled = rescale_dataset(ctx.data);
    ctx.data = std::move(rescaled.data);
    ctx.rescale_factor = rescaled.scale;
  }
  if (cfg.k > ctx.data.d()) throw ContractViolation("config: k exceeds the data dimension");
  if (cfg.verify && ctx.data.d() <= kDenseOracleMaxDim) ctx.spectrum = dense_eigh(ctx.data);
  return ctx;
}

RunOutput run_single(const ExperimentConfig& cfg, const ExperimentContext& ctx, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const DataMatrix& x = ctx.data;
  const Eigen::Index k = cfg.k;

  RunReport report;
  report.seed = seed;
  report.solver = solver_name(cfg.solver);
  report.d = x.d();
  report.n = x.n();
  report.k = k;
  report.realized_r = x.r();
  report.rescale_factor = ctx.rescale_factor;

  std::optional<OrthonormalFrame> reference;
  if (ctx.spectrum) {
    LeadingSubspace lead = leading_subspace(*ctx.spectrum, k);
    if (lead.warning) report.messages.push_back(*lead.warning);
    reference = std::move(lead.frame);
    if (cfg.solver == SolverKind::deflation) {
      // Deflation needs every one of the top-k gaps; the smallest one drives the parameters.
      double gap = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 1; j <= std::min(k, x.d() - 1); ++j) gap = std::min(gap, ctx.spectrum->gap_at(j));
      if (std::isfinite(gap)) report.true_eigengap = gap;
    } else if (k < x.d()) {
      report.true_eigengap = ctx.spectrum->gap_at(k);
    }
  } else if (cfg.verify) {
    report.messages.push_back("oracle skipped: d exceeds the dense limit");
  }
  const std::optional<double> lambda = cfg.lambda_hat ? cfg.lambda_hat : report.true_eigengap;
  report.eigengap_used = lambda;

  // Initialization.
  const Eigen::Index init_k = cfg.solver == SolverKind::deflation ? 1 : k;
  std::optional<OrthonormalFrame> w0;
  if (cfg.init == InitMethod::gaussian) {
    w0 = gaussian_init(x.d(), init_k, init_seed(seed));
  } else {
    w0 = power_warm_start(x, init_seed(seed), init_k).frame;
  }
  if (reference && init_k == k) {
    report.init_alignment = (static_cast<double>(k) - potential(*reference, *w0)) / static_cast<double>(k);
  }

  SolverConfig scfg;
  scfg.k = k;
  scfg.epochs = cfg.epochs;
  scfg.seed = seed;
  scfg.delta = cfg.delta;
  scfg.epsilon = cfg.epsilon;
  scfg.use_rotation = cfg.use_rotation;
  scfg.early_exit = cfg.early_exit;
  scfg.record_time = cfg.record_time;

  ConvergenceTrace trace;
  std::uint64_t burn_samples = 0;

  // Burn-in (k = 1 VR-PCA only).
  if (cfg.burn_in && cfg.epochs > 0) {
    if (k != 1 || (cfg.solver != SolverKind::vector && cfg.solver != SolverKind::block)) {
      throw ContractViolation("config: burn_in applies to the VR-PCA solvers with k = 1");
    }
    if (!lambda) throw ContractViolation("config: burn_in needs lambda_hat or the oracle");
    BurnInOptions bopts;
    bopts.lambda = *lambda;
    bopts.zeta = cfg.burn_in_zeta ? *cfg.burn_in_zeta
                                  : (report.init_alignment ? *report.init_alignment
                                                           : 1.0 / static_cast<double>(x.d()));
    bopts.zeta = std::clamp(bopts.zeta, 1e-12, 1.0);
    bopts.delta = std::min(cfg.delta, 0.49);
    bopts.constants = cfg.burn_in_constants;
    bopts.seed = burn_in_seed(seed);
    bopts.reference = reference;
    bopts.record_time = cfg.record_time;
    try {
      BurnInResult burn = burn_in(x, *w0, bopts);
      report.burn_in_iterations = burn.iterations;
      burn_samples = burn.trace.records.back().samples;
      trace = std::move(burn.trace);
      w0 = std::move(burn.frame);
    } catch (const NonConvergence& e) {
      report.status = "non_convergence";
      report.messages.push_back(e.what());
      report.epochs = 0;
      RunOutput out{std::move(report), e.trace()};
      out.report.samples = out.trace.records.empty() ? 0 : out.trace.last().samples;
      return out;
    }
  }

  // Step parameters.
  if (cfg.epochs > 0 && (!cfg.eta || !cfg.m) &&
      (cfg.solver == SolverKind::vector || cfg.solver == SolverKind::block ||
       cfg.solver == SolverKind::deflation)) {
    if (!lambda) {
      throw ContractViolation("config: eta and m unset and no eigengap available; "
                              "set lambda_hat or enable verify");
    }
    const Eigen::Index rule_k = cfg.solver == SolverKind::deflation ? 1 : k;
    const StepParameters p = select_parameters(*lambda, x.r(), rule_k, cfg.delta, cfg.constants);
    scfg.eta = cfg.eta.value_or(p.eta);
    scfg.m = cfg.m.value_or(p.m);
  } else {
    scfg.eta = cfg.eta.value_or(0.0);
    scfg.m = cfg.m.value_or(1);
  }
  report.eta = scfg.eta;
  report.m = scfg.m;
  report.epochs = cfg.epochs;

  // Solver.
  ConvergenceTrace solved;
  OrthonormalFrame final_frame = *w0;
  switch (cfg.solver) {
    case SolverKind::vector:
      solved = vrpca_vector(x, *w0, scfg, reference);
      break;
    case SolverKind::block:
      solved = vrpca_block(x, *w0, scfg, reference);
      break;
    case SolverKind::orthogonal:
      solved = orthogonal_iteration(x, *w0, cfg.epochs, reference, cfg.record_time);
      break;
    case SolverKind::oja: {
      const std::int64_t iters =
          cfg.oja_iterations > 0
              ? cfg.oja_iterations
              : static_cast<std::int64_t>(cfg.epochs) * (scfg.m + static_cast<std::int64_t>(x.n()));
      solved = oja_baseline(x, *w0, OjaSchedule{cfg.oja_c}, iters, seed, reference, cfg.record_time);
      break;
    }
    case SolverKind::deflation: {
      if (cfg.epochs == 0) {
        SolverConfig one = scfg;
        one.k = 1;
        solved = vrpca_vector(x, *w0, one, std::nullopt);
        break;
      }
      DeflationResult res = deflation_solve(x, k, scfg);
      for (auto& msg : res.warnings) report.messages.push_back(msg);
      std::uint64_t offset = 0;
      for (const auto& t : res.traces) {
        append_trace(solved, t, offset);
        offset = solved.records.back().samples;
      }
      solved.final_frame = res.frame;
      break;
    }
  }
  final_frame = *solved.final_frame;
  append_trace(trace, solved, burn_samples);
  trace.final_frame = final_frame;

  if (reference && final_frame.k() == k) {
    report.final_potential = potential(*reference, final_frame);
    if (cfg.solver != SolverKind::deflation) {
      for (const auto& rec : solved.records) {
        if (rec.boundary && rec.potential) report.epoch_potentials.push_back(*rec.potential);
      }
    }
  }
  report.final_residual = rayleigh_residual(x, final_frame.matrix());
  report.samples = trace.records.empty() ? 0 : trace.last().samples;
  if (lambda && *lambda > 0.0 && cfg.epsilon < 1.0) {
    report.runtime_model = runtime_model(x.d(), k, x.n(), x.r(), *lambda, cfg.epsilon);
  }
  if (cfg.record_time) report.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  return RunOutput{std::move(report), std::move(trace)};
}

std::string seeded_path(const std::string& path, std::uint64_t seed, bool multiple) {
  if (!multiple) return path;
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const std::string tag = ".seed" + std::to_string(seed);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

std::vector<RunReport> run_experiment(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = prepare_context(cfg);
  const bool multiple = cfg.seeds.size() > 1;

  const auto task = [&](std::uint64_t seed) {
    RunOutput out = run_single(cfg, ctx, seed);
    if (cfg.trace_path) {
      std::ofstream f(seeded_path(*cfg.trace_path, seed, multiple), std::ios::trunc);
      if (!f) throw ParseError("cannot write trace file " + *cfg.trace_path, 0);
      write_trace_jsonl(f, out.trace);
    }
    if (cfg.report_path) {
      std::ofstream f(seeded_path(*cfg.report_path, seed, multiple), std::ios::trunc);
      if (!f) throw ParseError("cannot write report file " + *cfg.report_path, 0);
      f << report_to_json(out.report).dump(2) << '\n';
    }
    if (cfg.frame_path && out.trace.final_frame) {
      save_dataset(seeded_path(*cfg.frame_path, seed, multiple), out.trace.final_frame->matrix(),
                   DataFormat::f64le);
    }
    return out.report;
  };

  std::vector<std::future<RunReport>> futures;
  futures.reserve(cfg.seeds.size());
  for (const std::uint64_t seed : cfg.seeds) {
    futures.push_back(std::async(multiple ? std::launch::async : std::launch::deferred, task, seed));
  }
  std::vector<RunReport> reports;
  reports.reserve(futures.size());
  for (auto& f : futures) reports.push_back(f.get());
  return reports;
}

void write_trace_jsonl(std::ostream& out, const ConvergenceTrace& trace) {
  for (const auto& rec : trace.records) {
    ordered_json j;
    j["epoch"] = rec.epoch;
    j["iter"] = rec.iter;
    j["potential"] = opt_json(rec.potential);
    j["residual"] = rec.residual;
    j["samples"] = rec.samples;
    j["elapsed_s"] = rec.elapsed_s;
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> read_trace_jsonl(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TraceRecord rec;
      rec.epoch = j.at("epoch").get<int>();
      rec.iter = j.at("iter").get<std::int64_t>();
      rec.potential = opt_get<double>(j, "potential");
      rec.residual = j.at("residual").get<double>();
      rec.samples = j.at("samples").get<std::uint64_t>();
      rec.elapsed_s = j.at("elapsed_s").get<double>();
      records.push_back(rec);
    } catch (const json::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  // Boundaries: the initial record and the last record of every epoch.
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool last_of_epoch = i + 1 == records.size() || records[i + 1].epoch != records[i].epoch;
    records[i].boundary = (records[i].epoch == 0 && records[i].iter == 0) || last_of_epoch;
  }
  return records;
}

json compare_baselines(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.k = 1;
  cfg.solver = SolverKind::vector;
  const ExperimentContext ctx = prepare_context(cfg);
  if (!ctx.spectrum) throw ContractViolation("compare: needs the oracle (verify on, d <= 2000)");
  const DataMatrix& x = ctx.data;
  const std::uint64_t seed = cfg.seeds.front();
  const OrthonormalFrame reference = leading_subspace(*ctx.spectrum, 1).frame;
  const double gap = ctx.spectrum->gap_at(1);
  const double lambda = cfg.lambda_hat.value_or(gap);

  const OrthonormalFrame w0 = cfg.init == InitMethod::gaussian
                                  ? gaussian_init(x.d(), 1, init_seed(seed))
                                  : power_warm_start(x, init_seed(seed)).frame;
  SolverConfig scfg;
  const StepParameters p = select_parameters(lambda, x.r(), 1, cfg.delta, cfg.constants);
  scfg.eta = cfg.eta.value_or(p.eta);
  scfg.m = cfg.m.value_or(p.m);
  scfg.epochs = cfg.epochs;
  scfg.seed = seed;
  scfg.delta = cfg.delta;
  scfg.record_time = cfg.record_time;

  const ConvergenceTrace vr = vrpca_vector(x, w0, scfg, reference);
  const ConvergenceTrace block = vrpca_block(x, w0, scfg, reference);
  const std::uint64_t budget = vr.last().samples;
  const ConvergenceTrace oja = oja_baseline(x, w0, OjaSchedule{cfg.oja_c},
                                            static_cast<std::int64_t>(budget), seed, reference,
                                            cfg.record_time);
  const int sweeps = static_cast<int>(budget / static_cast<std::uint64_t>(x.n()));
  const ConvergenceTrace orth = orthogonal_iteration(x, w0, sweeps, reference, cfg.record_time);

  const auto series = [](const ConvergenceTrace& t) {
    json s = json::array();
    for (const auto& rec : t.records) s.push_back({rec.samples, rec.potential.value_or(-1.0)});
    return s;
  };

  // Power-method rate. The classical bound is p_t <= tan^2(theta_0) (s2/s1)^{2t}; the
  // measured rate compares p_50 / p_10 with (s2/s1)^80 once faster modes have died out.
  const double ratio = ctx.spectrum->eigenvalues()[1] / ctx.spectrum->eigenvalues()[0];
  const auto orth_potential = [&](int sweep) { return *orth.records[static_cast<std::size_t>(sweep)].potential; };
  const double p0 = orth_potential(0);
  const int rate_from = std::min(10, sweeps);
  const int rate_to = std::min(50, sweeps);
  const double bound = p0 / (1.0 - p0) * std::pow(ratio, 2.0 * rate_to);
  const double rate_factor =
      rate_to > rate_from
          ? orth_potential(rate_to) / (orth_potential(rate_from) * std::pow(ratio, 2.0 * (rate_to - rate_from)))
          : 1.0;

  json j;
  j["seed"] = seed;
  j["d"] = x.d();
  j["n"] = x.n();
  j["eigengap"] = gap;
  j["eta"] = scfg.eta;
  j["m"] = scfg.m;
  j["sample_budget"] = budget;
  j["vrpca"] = {{"final_potential", *vr.last().potential}, {"series", series(vr)}};
  j["oja"] = {{"c", cfg.oja_c}, {"final_potential", *oja.last().potential}, {"series", series(oja)}};
  j["orthogonal"] = {{"sweeps", sweeps},
                     {"final_potential", *orth.last().potential},
                     {"series", series(orth)},
                     {"rate_check_sweeps", json::array({rate_from, rate_to})},
                     {"final_over_classical_bound", orth_potential(rate_to) / bound},
                     {"rate_observed_over_predicted", rate_factor}};
  j["block_k1_vs_vector_max_diff"] =
      (block.final_frame->matrix() - vr.final_frame->matrix()).cwiseAbs().maxCoeff();
  j["vrpca_le_oja"] = *vr.last().potential <= *oja.last().potential;
  return j;
}

json geometry_report(const GeometryOptions& opts) {
  json j;
  j["lambda"] = opts.lambda;
  j["eps"] = opts.eps;

  // Hessian determinant on A = diag(1, 0).
  {
    Matrix col = Matrix::Zero(2, 1);
    col(0, 0) = 1.0;
    const DataMatrix a(std::move(col));
    CounterRng rng(CounterRng(opts.seed).substream(10).next_u64());
    double max_det = -std::numeric_limits<double>::infinity();
    double max_err = 0.0;
    std::int64_t not_psd = 0;
    std::int64_t eligible = 0;
    for (std::int64_t s = 0; s < opts.determinant_samples; ++s) {
      Vector w(2);
      w << rng.gaussian(), rng.gaussian();
      const Matrix h = rayleigh_hessian(a, w);
      const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
      const double w1 = w[0] * w[0];
      const double w2 = w[1] * w[1];
      const double expected = -4.0 * w1 * w2 / std::pow(w1 + w2, 4);
      max_det = std::max(max_det, det);
      max_err = std::max(max_err, std::abs(det - expected));
      if (std::abs(w[0] * w[1]) > 1e-3) {
        ++eligible;
        if (!nonconvexity_certificate(a, w).is_psd) ++not_psd;
      }
    }
    j["determinant_sweep"] = {{"samples", opts.determinant_samples},
                              {"max_determinant", max_det},
                              {"max_abs_error_vs_closed_form", max_err},
                              {"eligible", eligible},
                              {"not_psd", not_psd}};
  }

  // Strong-convexity probe on a spectral-norm-1 instance.
  {
    const Eigen::Index d = opts.probe_dim;
    SpectrumSpec spec = SpectrumSpec::geometric_tail(d, 1.0, 1.0 - opts.lambda, 0.8);
    const DataMatrix x = synthesize_dataset(spec, 4 * d, opts.seed);
    const Spectrum spectrum = dense_eigh(x);
    const Vector v1 = spectrum.eigenvectors().column(0);
    CounterRng rng(CounterRng(opts.seed).substream(11).next_u64());
    Vector dir(d);
    for (Eigen::Index i = 0; i < d; ++i) dir[i] = rng.gaussian();
    dir -= v1.dot(dir) * v1;
    const double target = 0.9 * spectrum.gap_at(1) / 44.0;
    Vector w0 = v1 + target * dir / dir.norm();
    w0.normalize();
    const ConvexRegionBuild built = build_convex_region(spectrum, w0);
    const CurvatureRange range =
        probe_strong_convexity(built.region, x, opts.probe_samples, opts.seed);
    const double opt_dist = (built.projected_optimum - w0).norm();
    j["convexity_probe"] = {{"d", d},
                            {"lambda", built.region.lambda()},
                            {"radius", built.region.radius()},
                            {"distance_w0_v1", built.distance},
                            {"samples", range.samples},
                            {"min_curvature", range.min_curvature},
                            {"max_curvature", range.max_curvature},
                            {"projected_optimum_distance", opt_dist},
                            {"projected_optimum_bound", 1.25 * built.distance},
                            {"projected_optimum_in_region", built.region.contains(built.projected_optimum)}};
  }

  // Tightness construction.
  {
    const TightnessCounterexample ce = tightness_counterexample(opts.lambda, opts.eps);
    j["counterexample"] = {
        {"w0", std::vector<double>(ce.w0.data(), ce.w0.data() + ce.w0.size())},
        {"ray_direction", std::vector<double>(ce.ray_direction.data(), ce.ray_direction.data() + 3)},
        {"second_derivative_at_0", ce.second_derivative_at_0},
        {"hessian_directional_at_0", ce.hessian_directional_at_0},
        {"distance_v1_w0", (ce.v1 - ce.w0).norm()},
        {"distance_bound", std::sqrt(2.0 * (1.0 + opts.eps) * opts.lambda)},
        {"sign_change_t", 1.0 / std::sqrt(3.0)}};
  }
  return j;
}

}  // namespace vrpca
