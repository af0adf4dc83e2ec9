// vrpca: command-line front end for the solvers, baselines and geometry checks.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vrpca/dataset_io.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/experiment.hpp"
#include "vrpca/oracle.hpp"

namespace {

using nlohmann::json;

// Flags mirror the config keys. Every flag that is given overrides the file.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> dataset, format, solver, init, trace_path, report_path, frame_path;
  std::optional<std::vector<double>> spectrum;
  std::optional<std::int64_t> synth_n, m, oja_iterations;
  std::optional<std::uint64_t> synth_seed;
  std::optional<Eigen::Index> k;
  std::optional<int> epochs;
  std::optional<double> eta, delta, epsilon, lambda_hat, burn_in_zeta, oja_c;
  std::optional<double> c, c_prime, c_double_prime;
  std::optional<bool> use_rotation, early_exit, burn_in, rescale, verify, record_time;
  std::optional<std::vector<std::uint64_t>> seeds;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--dataset", dataset, "data file (one point per CSV line, or VRPC binary)");
    app->add_option("--format", format, "dataset format: csv or f64le");
    app->add_option("--spectrum", spectrum, "covariance eigenvalues to synthesize from")->delimiter(',');
    app->add_option("--synth_n", synth_n, "columns to synthesize (default 10 d)");
    app->add_option("--synth_seed", synth_seed);
    app->add_option("--solver", solver, "vector, block, deflation, oja or orthogonal");
    app->add_option("--k", k);
    app->add_option("--eta", eta);
    app->add_option("--m", m);
    app->add_option("--epochs", epochs);
    app->add_option("--delta", delta);
    app->add_option("--epsilon", epsilon);
    app->add_option("--use_rotation", use_rotation);
    app->add_option("--early_exit", early_exit);
    app->add_option("--lambda_hat", lambda_hat, "eigengap estimate (default: oracle gap)");
    app->add_option("--c", c);
    app->add_option("--c_prime", c_prime);
    app->add_option("--c_double_prime", c_double_prime);
    app->add_option("--init", init, "gaussian or power");
    app->add_option("--burn_in", burn_in);
    app->add_option("--burn_in_zeta", burn_in_zeta);
    app->add_option("--rescale", rescale);
    app->add_option("--verify", verify);
    app->add_option("--oja_c", oja_c);
    app->add_option("--oja_iterations", oja_iterations);
    app->add_option("--seeds", seeds)->delimiter(',');
    app->add_option("--record_time", record_time);
    app->add_option("--trace_path", trace_path);
    app->add_option("--report_path", report_path);
    app->add_option("--frame_path", frame_path);
  }

  vrpca::ExperimentConfig build() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw vrpca::ParseError("cannot open config " + config_path, 0);
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw vrpca::ParseError(std::string("config: ") + e.what(), e.byte);
      }
    }
    const auto set = [&j](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    if (dataset) j.erase("spectrum");
    if (spectrum) j.erase("dataset");
    set("dataset", dataset);
    set("format", format);
    set("spectrum", spectrum);
    set("synth_n", synth_n);
    set("synth_seed", synth_seed);
    set("solver", solver);
    set("k", k);
    set("eta", eta);
    set("m", m);
    set("epochs", epochs);
    set("delta", delta);
    set("epsilon", epsilon);
    set("use_rotation", use_rotation);
    set("early_exit", early_exit);
    set("lambda_hat", lambda_hat);
    set("init", init);
    set("burn_in", burn_in);
    set("burn_in_zeta", burn_in_zeta);
    set("rescale", rescale);
    set("verify", verify);
    set("oja_c", oja_c);
    set("oja_iterations", oja_iterations);
    set("seeds", seeds);
    set("record_time", record_time);
    set("trace_path", trace_path);
    set("report_path", report_path);
    set("frame_path", frame_path);
    if (c || c_prime || c_double_prime) {
      json& cj = j["constants"];
      if (!cj.is_object()) cj = json::object();
      if (c) cj["c"] = *c;
      if (c_prime) cj["c_prime"] = *c_prime;
      if (c_double_prime) cj["c_double_prime"] = *c_double_prime;
    }
    vrpca::ExperimentConfig cfg = vrpca::config_from_json(j);
    cfg.validate();
    return cfg;
  }
};

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw vrpca::ParseError("cannot write " + out, 0);
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VR-PCA: variance-reduced stochastic PCA"};
  app.require_subcommand(1);

  ConfigFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "run the solver pipeline for each seed");
  solve_flags.attach(solve);

  ConfigFlags compare_flags;
  std::string compare_out;
  CLI::App* compare = app.add_subcommand("compare", "VR-PCA vs Oja vs orthogonal iteration");
  compare_flags.attach(compare);
  compare->add_option("--out", compare_out, "output JSON (default stdout)");

  vrpca::GeometryOptions geo;
  std::string geo_out;
  CLI::App* geometry = app.add_subcommand("geometry", "Rayleigh-quotient geometry checks");
  geometry->add_option("--lambda", geo.lambda);
  geometry->add_option("--eps", geo.eps);
  geometry->add_option("--determinant_samples", geo.determinant_samples);
  geometry->add_option("--probe_samples", geo.probe_samples);
  geometry->add_option("--probe_dim", geo.probe_dim);
  geometry->add_option("--seed", geo.seed);
  geometry->add_option("--out", geo_out, "output JSON (default stdout)");

  std::vector<double> synth_spectrum;
  std::int64_t synth_n = 0;
  std::uint64_t synth_seed = 1;
  std::string synth_out, synth_format = "csv";
  CLI::App* synth = app.add_subcommand("synth", "write a dataset with a prescribed covariance spectrum");
  synth->add_option("--spectrum", synth_spectrum)->required()->delimiter(',');
  synth->add_option("--n", synth_n, "columns (default 10 d)");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--format", synth_format, "csv or f64le");

  std::string conv_in, conv_out, conv_in_format = "csv", conv_out_format = "f64le";
  CLI::App* convert = app.add_subcommand("convert", "convert between CSV and VRPC binary");
  convert->add_option("--in", conv_in)->required();
  convert->add_option("--out", conv_out)->required();
  convert->add_option("--in_format", conv_in_format);
  convert->add_option("--out_format", conv_out_format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      const vrpca::ExperimentConfig cfg = solve_flags.build();
      const std::vector<vrpca::RunReport> reports = vrpca::run_experiment(cfg);
      json out;
      if (reports.size() == 1) {
        out = vrpca::report_to_json(reports.front());
      } else {
        out = json::array();
        for (const auto& r : reports) out.push_back(vrpca::report_to_json(r));
      }
      if (!cfg.report_path) std::cout << out.dump(2) << '\n';
    } else if (*compare) {
      emit(vrpca::compare_baselines(compare_flags.build()), compare_out);
    } else if (*geometry) {
      emit(vrpca::geometry_report(geo), geo_out);
    } else if (*synth) {
      vrpca::SpectrumSpec spec{synth_spectrum};
      const std::int64_t n = synth_n > 0 ? synth_n : 10 * spec.d();
      const vrpca::DataMatrix x = vrpca::synthesize_dataset(spec, n, synth_seed);
      vrpca::save_dataset(synth_out, x.matrix(), vrpca::parse_format(synth_format));
    } else if (*convert) {
      const vrpca::DataMatrix x = vrpca::load_dataset(conv_in, vrpca::parse_format(conv_in_format));
      vrpca::save_dataset(conv_out, x.matrix(), vrpca::parse_format(conv_out_format));
    }
  } catch (const vrpca::DegenerateIterate& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vrpca::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
