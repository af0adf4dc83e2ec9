#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/init.hpp"
#include "vrpca/oracle.hpp"
#include "vrpca/solvers.hpp"

using namespace vrpca;
using vrpca::testing::random_frame;

namespace {

struct Instance {
  DataMatrix data;
  OrthonormalFrame basis;  // full planted eigenbasis
  OrthonormalFrame leading(Eigen::Index k) const { return OrthonormalFrame(basis.matrix().leftCols(k)); }
};

Instance planted(std::vector<double> spectrum, Eigen::Index n, std::uint64_t seed) {
  SyntheticData sd = synthesize_planted(SpectrumSpec{std::move(spectrum)}, n, seed);
  return Instance{std::move(sd.data), std::move(sd.basis)};
}

// d = 50, spectrum 1, 0.7 * 0.8^(j-2): gap 0.3 at k = 1.
Instance standard_vector_instance() {
  return planted(SpectrumSpec::geometric_tail(50, 1.0, 0.7, 0.8).eigenvalues, 500, 1);
}

SolverConfig config_for(const DataMatrix& x, double lambda, Eigen::Index k, int epochs,
                        std::uint64_t seed) {
  const StepParameters p = select_parameters(lambda, x.r(), k, 0.1);
  SolverConfig cfg;
  cfg.k = k;
  cfg.eta = p.eta;
  cfg.m = p.m;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.record_time = false;
  return cfg;
}

std::vector<double> ratios(const std::vector<double>& p) {
  std::vector<double> out;
  for (std::size_t i = 1; i < p.size(); ++i) out.push_back(p[i] / p[i - 1]);
  return out;
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate(3));
  cfg.eta = -1e-3;
  EXPECT_THROW(cfg.validate(3), ContractViolation);
  cfg = SolverConfig{};
  cfg.m = 0;
  EXPECT_THROW(cfg.validate(3), ContractViolation);
  cfg = SolverConfig{};
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(3), ContractViolation);
  cfg = SolverConfig{};
  cfg.k = 4;
  EXPECT_THROW(cfg.validate(3), ContractViolation);
  cfg = SolverConfig{};
  cfg.epochs = -1;
  EXPECT_THROW(cfg.validate(3), ContractViolation);
}

TEST(SelectParameters, FormulaExample) {
  // a = min{1, 1/(4*0.01*log 20), (1/0.04)(1/log 20)^2} = 1, eta = 0.01*0.3, m = ceil(log 20/(eta*0.3)).
  const StepParameters p = select_parameters(0.3, 1.0, 1, 0.1, StepRuleConstants{1.0, 1.0, 1.0});
  EXPECT_NEAR(p.eta, 0.003, 1e-17);
  EXPECT_EQ(p.m, 3329);
}

TEST(SelectParameters, RadiusScaling) {
  const StepParameters a = select_parameters(0.3, 2.0, 2, 0.1);
  const StepParameters b = select_parameters(0.3, 4.0, 2, 0.1);
  EXPECT_NEAR(b.eta, a.eta / 4.0, 1e-18);
  EXPECT_NEAR(static_cast<double>(b.m), 4.0 * static_cast<double>(a.m), 4.0);
}

TEST(SelectParameters, HalvingDeltaNeverIncreasesEta) {
  for (double delta = 0.9; delta > 1e-4; delta /= 2.0) {
    for (Eigen::Index k : {1, 3, 8}) {
      EXPECT_LE(select_parameters(0.2, 3.0, k, delta / 2.0).eta, select_parameters(0.2, 3.0, k, delta).eta);
    }
  }
}

TEST(SelectParameters, NonPositiveGapPointsToBurnIn) {
  try {
    select_parameters(0.0, 1.0, 1, 0.1);
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("burn_in"), std::string::npos);
  }
}

TEST(DefaultEpochs, Value) {
  EXPECT_EQ(default_epochs(1e-10, 0.1), 8);
  EXPECT_THROW(default_epochs(0.0, 0.1), ContractViolation);
}

TEST(VrpcaVector, ZeroStepKeepsIterate) {
  const Instance inst = planted({1.0, 0.6, 0.3}, 12, 2);
  const OrthonormalFrame w0(random_frame(3, 1, 3));
  SolverConfig cfg;
  cfg.eta = 0.0;
  cfg.m = 50;
  cfg.epochs = 3;
  const ConvergenceTrace t = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  EXPECT_LE((t.final_frame->matrix() - w0.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  for (const auto& rec : t.records) EXPECT_NEAR(*rec.potential, *t.records.front().potential, 1e-15);
}

TEST(VrpcaVector, TopEigenvectorIsFixedPoint) {
  const Instance inst = planted({1.0, 0.5}, 10, 4);
  const SolverConfig cfg = config_for(inst.data, 0.5, 1, 2, 5);
  const ConvergenceTrace t = vrpca_vector(inst.data, inst.leading(1), cfg, inst.leading(1));
  for (const auto& rec : t.records) EXPECT_LE(*rec.potential, 1e-12);
}

TEST(VrpcaVector, StandardInstanceConvergesGeometrically) {
  const Instance inst = standard_vector_instance();
  const SolverConfig cfg = config_for(inst.data, 0.3, 1, 10, 1);
  const OrthonormalFrame w0 = gaussian_init(50, 1, 1);
  const ConvergenceTrace t = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  const std::vector<double> p = t.boundary_potentials();
  ASSERT_EQ(p.size(), 11u);
  std::vector<double> r = ratios(p);
  EXPECT_GE(std::count_if(r.begin(), r.end(), [](double v) { return v <= 0.7; }), 8);
  std::nth_element(r.begin(), r.begin() + 5, r.end());
  EXPECT_LE(r[5], 0.5);
  EXPECT_LE(p.back(), 1e-8);
}

TEST(VrpcaVector, TraceLayout) {
  const Instance inst = planted({1.0, 0.7, 0.2, 0.1}, 20, 6);
  SolverConfig cfg = config_for(inst.data, 0.3, 1, 3, 7);
  cfg.m = 95;
  const ConvergenceTrace t = vrpca_vector(inst.data, gaussian_init(4, 1, 1), cfg, inst.leading(1));
  // initial + per epoch (9 inner records at stride 9 plus the boundary) ... stride = m / 10.
  const auto boundaries = std::count_if(t.records.begin(), t.records.end(), [](const TraceRecord& r) { return r.boundary; });
  EXPECT_EQ(boundaries, 4);
  EXPECT_EQ(t.records.size(), 1u + 3u * (10u + 1u));
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    EXPECT_GE(t.records[i].samples, t.records[i - 1].samples);
  }
  EXPECT_EQ(t.last().samples, 3u * (20u + 95u));
  EXPECT_EQ(t.last().iter, 95);
}

TEST(VrpcaVector, WithoutReferenceRecordsResidualOnly) {
  const Instance inst = planted({1.0, 0.7, 0.2}, 9, 8);
  const ConvergenceTrace t =
      vrpca_vector(inst.data, gaussian_init(3, 1, 2), config_for(inst.data, 0.3, 1, 2, 3));
  for (const auto& rec : t.records) {
    EXPECT_FALSE(rec.potential.has_value());
    EXPECT_GE(rec.residual, 0.0);
  }
  EXPECT_LT(t.last().residual, t.records.front().residual);
}

TEST(VrpcaVector, Deterministic) {
  const Instance inst = planted({1.0, 0.7, 0.5, 0.1}, 30, 9);
  const SolverConfig cfg = config_for(inst.data, 0.2, 1, 3, 11);
  const OrthonormalFrame w0 = gaussian_init(4, 1, 5);
  const ConvergenceTrace a = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  const ConvergenceTrace b = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.final_frame->matrix(), b.final_frame->matrix());
}

TEST(VrpcaVector, EarlyExitStopsAtEpsilon) {
  const Instance inst = planted({1.0, 0.5, 0.2}, 12, 10);
  SolverConfig cfg = config_for(inst.data, 0.5, 1, 20, 1);
  cfg.early_exit = true;
  cfg.epsilon = 1e-6;
  const ConvergenceTrace t = vrpca_vector(inst.data, gaussian_init(3, 1, 3), cfg, inst.leading(1));
  EXPECT_LE(*t.last().potential, 1e-6);
  EXPECT_LT(t.last().epoch, 20);
}

TEST(VrpcaVector, RejectsBadInputs) {
  const Instance inst = planted({1.0, 0.5}, 4, 1);
  SolverConfig cfg;
  EXPECT_THROW(vrpca_vector(inst.data, OrthonormalFrame(Matrix::Identity(2, 2)), cfg), ContractViolation);
  EXPECT_THROW(vrpca_vector(inst.data, OrthonormalFrame(Matrix::Identity(3, 1)), cfg), ContractViolation);
}

TEST(VrpcaBlock, SingleColumnMatchesVectorBitForBit) {
  const Instance inst = planted(SpectrumSpec::geometric_tail(10, 1.0, 0.7, 0.8).eigenvalues, 60, 3);
  const SolverConfig cfg = config_for(inst.data, 0.3, 1, 3, 17);
  const OrthonormalFrame w0 = gaussian_init(10, 1, 4);
  const ConvergenceTrace v = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  const ConvergenceTrace b = vrpca_block(inst.data, w0, cfg, inst.leading(1));
  EXPECT_EQ(v.final_frame->matrix(), b.final_frame->matrix());
  EXPECT_EQ(v.records, b.records);
  SolverConfig plain = cfg;
  plain.use_rotation = false;
  EXPECT_EQ(vrpca_block(inst.data, w0, plain).final_frame->matrix(), v.final_frame->matrix());
}

TEST(VrpcaBlock, LeadingSubspaceIsFixedPoint) {
  const Instance inst = planted({1.0, 0.9, 0.5, 0.2, 0.1}, 20, 5);
  const SolverConfig cfg = config_for(inst.data, 0.4, 2, 1, 6);
  const ConvergenceTrace t = vrpca_block(inst.data, inst.leading(2), cfg, inst.leading(2));
  for (const auto& rec : t.records) EXPECT_LE(*rec.potential, 1e-10);
}

TEST(VrpcaBlock, ConvergesWithAndWithoutRotation) {
  const Instance inst = planted({1.0, 0.95, 0.6, 0.3, 0.2, 0.1}, 40, 7);
  SolverConfig cfg = config_for(inst.data, 0.35, 2, 10, 8);
  const OrthonormalFrame w0 = gaussian_init(6, 2, 9);
  const ConvergenceTrace rotated = vrpca_block(inst.data, w0, cfg, inst.leading(2));
  cfg.use_rotation = false;
  const ConvergenceTrace plain = vrpca_block(inst.data, w0, cfg, inst.leading(2));
  EXPECT_LE(*rotated.last().potential, 1e-6);
  EXPECT_LE(*plain.last().potential, 1e-6);
}

TEST(VrpcaBlock, BoundaryIteratesStayOrthonormal) {
  // A run with T epochs is a prefix of a run with T + 1 epochs (same seed), so
  // checking the final frame of every prefix checks every epoch boundary.
  const Instance inst = planted({1.0, 0.95, 0.9, 0.5, 0.3, 0.2, 0.1}, 30, 12);
  const OrthonormalFrame w0 = gaussian_init(7, 3, 13);
  for (int epochs = 0; epochs <= 4; ++epochs) {
    const SolverConfig cfg = config_for(inst.data, 0.4, 3, epochs, 14);
    EXPECT_LE(vrpca_block(inst.data, w0, cfg).final_frame->orthonormality_error(), 1e-10);
  }
}

TEST(VrpcaBlock, Deterministic) {
  const Instance inst = planted({1.0, 0.9, 0.4, 0.2}, 15, 2);
  const SolverConfig cfg = config_for(inst.data, 0.5, 2, 2, 3);
  const OrthonormalFrame w0 = gaussian_init(4, 2, 4);
  const ConvergenceTrace a = vrpca_block(inst.data, w0, cfg, inst.leading(2));
  const ConvergenceTrace b = vrpca_block(inst.data, w0, cfg, inst.leading(2));
  EXPECT_EQ(a.records, b.records);
}

TEST(BurnIn, RuleFormulas) {
  const BurnInConstants c{2.0, 3.0};
  const double l = std::log(2.0 / 0.1);
  EXPECT_NEAR(burn_in_step_size(0.3, 0.5, 0.1, 2.0, c), 2.0 * 0.01 * 0.3 * 0.125 / (4.0 * l * l), 1e-18);
  EXPECT_EQ(burn_in_iterations(0.01, 0.3, 0.5, 0.1, c),
            static_cast<std::int64_t>(std::floor(3.0 * l / (0.01 * 0.3 * 0.5))));
}

TEST(BurnIn, AlreadyAlignedReturnsImmediately) {
  const Instance inst = planted({1.0, 0.5, 0.2}, 10, 3);
  Vector w = std::sqrt(0.9) * inst.basis.matrix().col(0) + std::sqrt(0.1) * inst.basis.matrix().col(1);
  BurnInOptions opts;
  opts.lambda = 0.5;
  opts.zeta = 0.9;
  opts.reference = inst.leading(1);
  const BurnInResult r = burn_in(inst.data, OrthonormalFrame(Matrix(w)), opts);
  EXPECT_EQ(r.iterations, 0);
}

TEST(BurnIn, RandomStartReachesHalf) {
  const Instance inst = planted(SpectrumSpec::geometric_tail(30, 1.0, 0.7, 0.8).eigenvalues, 300, 1);
  BurnInOptions opts;
  opts.lambda = 0.3;
  opts.zeta = 1.0 / 30.0;
  opts.seed = 1;
  opts.reference = inst.leading(1);
  opts.record_time = false;
  const BurnInResult r = burn_in(inst.data, gaussian_init(30, 1, 1001), opts);
  EXPECT_LE(potential(inst.leading(1), r.frame), 0.5);
  EXPECT_GT(r.iterations, 0);
  EXPECT_LE(r.iterations, 10 * r.rule_iterations);
}

TEST(BurnIn, PlateauStopWithoutReference) {
  const Instance inst = planted(SpectrumSpec::geometric_tail(30, 1.0, 0.7, 0.8).eigenvalues, 300, 1);
  BurnInOptions opts;
  opts.lambda = 0.3;
  opts.zeta = 1.0 / 30.0;
  opts.seed = 2;
  opts.record_time = false;
  const BurnInResult r = burn_in(inst.data, gaussian_init(30, 1, 1002), opts);
  EXPECT_LE(potential(inst.leading(1), r.frame), 0.5);
}

TEST(BurnIn, ExhaustedBudgetCarriesTrace) {
  // A = diag(1, 0.5) from axis columns, started exactly on e_2: every update keeps the
  // e_1 coordinate exactly zero, so the target is unreachable.
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = std::sqrt(2.0);
  x(1, 1) = 1.0;
  const DataMatrix data(x);
  BurnInOptions opts;
  opts.lambda = 0.5;
  opts.zeta = 1.0;
  opts.eta_scale = 1e-3;
  opts.reference = OrthonormalFrame(Matrix::Identity(2, 1));
  opts.record_time = false;
  Matrix e2 = Matrix::Zero(2, 1);
  e2(1, 0) = 1.0;
  try {
    burn_in(data, OrthonormalFrame(e2), opts);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    ASSERT_FALSE(e.trace().records.empty());
    EXPECT_EQ(*e.trace().last().potential, 1.0);
    EXPECT_GT(e.trace().last().samples, 0u);
  }
}

TEST(BurnIn, RejectsBadOptions) {
  const Instance inst = planted({1.0, 0.5}, 4, 1);
  BurnInOptions opts;
  opts.lambda = 0.5;
  opts.zeta = 0.0;
  EXPECT_THROW(burn_in(inst.data, inst.leading(1), opts), ContractViolation);
  opts.zeta = 0.5;
  opts.delta = 0.5;
  EXPECT_THROW(burn_in(inst.data, inst.leading(1), opts), ContractViolation);
}

TEST(Oja, ZeroScheduleKeepsIterate) {
  const Instance inst = planted({1.0, 0.5, 0.1}, 6, 2);
  const OrthonormalFrame w0 = gaussian_init(3, 1, 1);
  const ConvergenceTrace t = oja_baseline(inst.data, w0, OjaSchedule{0.0}, 100, 1);
  EXPECT_LE((t.final_frame->matrix() - w0.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Oja, SingleDirectionConverges) {
  Matrix e1 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  const ConvergenceTrace t =
      oja_baseline(DataMatrix(e1), gaussian_init(3, 1, 4), OjaSchedule{1.0}, 2000, 5,
                   OrthonormalFrame(e1), false);
  EXPECT_LE(*t.last().potential, 1e-6);
}

TEST(Oja, WorseThanVrpcaAtEqualBudget) {
  const Instance inst = standard_vector_instance();
  const SolverConfig cfg = config_for(inst.data, 0.3, 1, 3, 1);
  const OrthonormalFrame w0 = gaussian_init(50, 1, 1);
  const ConvergenceTrace vr = vrpca_vector(inst.data, w0, cfg, inst.leading(1));
  const ConvergenceTrace oja = oja_baseline(inst.data, w0, OjaSchedule{1.0},
                                            static_cast<std::int64_t>(vr.last().samples), 1,
                                            inst.leading(1), false);
  EXPECT_LT(*vr.last().potential, *oja.last().potential);
}

TEST(OrthogonalIteration, LeadingSubspaceIsFixedPoint) {
  const Instance inst = planted({1.0, 0.8, 0.3, 0.1}, 10, 3);
  const ConvergenceTrace t = orthogonal_iteration(inst.data, inst.leading(2), 10, inst.leading(2), false);
  for (const auto& rec : t.records) EXPECT_LE(*rec.potential, 1e-12);
}

TEST(OrthogonalIteration, OneSweepByHand) {
  const DataMatrix x = vrpca::testing::diagonal_data({1.0, 0.5});
  Matrix w0(2, 1);
  w0 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const ConvergenceTrace t = orthogonal_iteration(x, OrthonormalFrame(w0), 1);
  // A w0 is proportional to (1, 0.5).
  Vector expected(2);
  expected << 1.0, 0.5;
  expected /= expected.norm();
  EXPECT_LE((t.final_frame->matrix().col(0) - expected).norm(), 1e-15);
}

TEST(OrthogonalIteration, MatchesPowerMethodRate) {
  const Instance inst = standard_vector_instance();
  const OrthonormalFrame w0 = gaussian_init(50, 1, 3);
  const ConvergenceTrace t = orthogonal_iteration(inst.data, w0, 50, inst.leading(1), false);
  const auto p = [&](int sweep) { return *t.records[static_cast<std::size_t>(sweep)].potential; };
  // Classical bound: tan^2 of the initial angle times (s2/s1)^{2t}.
  EXPECT_LE(p(50), p(0) / (1.0 - p(0)) * std::pow(0.7, 2.0 * 50));
  // Measured rate once the faster modes are gone.
  const double predicted = p(10) * std::pow(0.7, 2.0 * 40);
  EXPECT_LE(p(50), 10.0 * predicted);
  EXPECT_GE(p(50), predicted / 10.0);
}

TEST(Deflation, SingleComponentMatchesVector) {
  const Instance inst = planted({1.0, 0.6, 0.2}, 12, 4);
  const SolverConfig cfg = config_for(inst.data, 0.4, 1, 3, 21);
  const DeflationResult res = deflation_solve(inst.data, 1, cfg);
  const ConvergenceTrace v =
      vrpca_vector(inst.data, gaussian_init(3, 1, deflation_seed(21, 0)), cfg);
  EXPECT_EQ(res.frame.matrix(), v.final_frame->matrix());
}

TEST(Deflation, RecoversTwoComponents) {
  const Instance inst = planted({1.0, 0.8, 0.6}, 12, 5);
  const SolverConfig cfg = config_for(inst.data, 0.2, 1, 8, 2);
  const DeflationResult res = deflation_solve(inst.data, 2, cfg);
  EXPECT_LE(potential(inst.leading(2), res.frame), 1e-6);
  EXPECT_TRUE(res.warnings.empty());
  EXPECT_NEAR(res.eigenvalue_estimates[0], 1.0, 1e-6);
  EXPECT_NEAR(res.eigenvalue_estimates[1], 0.8, 1e-6);
}

TEST(Deflation, RepeatedEigenvalueWarns) {
  const Instance inst = planted({1.0, 1.0, 0.3}, 12, 6);
  const SolverConfig cfg = config_for(inst.data, 0.7, 1, 3, 3);
  const DeflationResult res = deflation_solve(inst.data, 2, cfg);
  EXPECT_EQ(res.frame.k(), 2);
  EXPECT_FALSE(res.warnings.empty());
}
