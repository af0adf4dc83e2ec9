#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_support.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/jacobi.hpp"
#include "vrpca/oracle.hpp"
#include "vrpca/solvers.hpp"

using namespace vrpca;
using vrpca::testing::gaussian_matrix;
using vrpca::testing::random_frame;

TEST(CounterRng, DeterministicAndSubstreamsDiffer) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.draws(), 100u);
  CounterRng s1 = CounterRng(42).substream(1);
  CounterRng s2 = CounterRng(42).substream(2);
  EXPECT_NE(s1.next_u64(), s2.next_u64());
  EXPECT_NE(CounterRng(1).next_u64(), CounterRng(2).next_u64());
}

TEST(CounterRng, UniformIndexCoversRangeWithoutBias) {
  CounterRng rng(3);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, draws / 7.0, 5.0 * std::sqrt(draws / 7.0));
  EXPECT_THROW(rng.uniform_index(0), ContractViolation);
}

TEST(CounterRng, GaussianMoments) {
  CounterRng rng(9);
  const int draws = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / draws, 0.0, 0.01);
  EXPECT_NEAR(sq / draws, 1.0, 0.01);
}

TEST(JacobiEigh, ReconstructsRandomSymmetric) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(s * 7 % 50);
    const Matrix g = gaussian_matrix(d, d, 90 + s);
    const Matrix a = 0.5 * (g + g.transpose());
    const SymmetricEigen eig = jacobi_eigh(a);
    const Matrix rec = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    EXPECT_LE((rec - a).norm(), 1e-10) << "d=" << d;
    EXPECT_LE(orthonormality_error(eig.vectors), 1e-12);
    for (Eigen::Index i = 1; i < d; ++i) EXPECT_GE(eig.values[i - 1], eig.values[i]);
  }
}

TEST(JacobiEigh, OffDiagonalMassDecreasesEverySweep) {
  const Matrix g = gaussian_matrix(30, 30, 4);
  const SymmetricEigen eig = jacobi_eigh(g + g.transpose());
  ASSERT_GE(eig.off_diagonal_history.size(), 2u);
  for (std::size_t i = 1; i < eig.off_diagonal_history.size(); ++i) {
    EXPECT_LT(eig.off_diagonal_history[i], eig.off_diagonal_history[i - 1]);
  }
}

TEST(JacobiEigh, RejectsAsymmetricAndNonSquare) {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = 1.0;
  EXPECT_THROW(jacobi_eigh(a), ContractViolation);
  EXPECT_THROW(jacobi_eigh(Matrix::Zero(2, 3)), ContractViolation);
}

TEST(JacobiSvd, ReconstructsAndOrdersSingularValues) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(s % 6);
    const Matrix m = gaussian_matrix(k, k, 300 + s);
    const SmallSvd svd = jacobi_svd(m);
    EXPECT_LE((svd.u * svd.s.asDiagonal() * svd.v.transpose() - m).norm(), 1e-12);
    EXPECT_LE(orthonormality_error(svd.u), 1e-12);
    EXPECT_LE(orthonormality_error(svd.v), 1e-12);
    for (Eigen::Index i = 1; i < k; ++i) EXPECT_GE(svd.s[i - 1], svd.s[i]);
  }
}

TEST(JacobiSvd, CompletesUForRankDeficientInput) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 2.0;
  m(1, 0) = 1.0;
  const SmallSvd svd = jacobi_svd(m);
  EXPECT_LE(orthonormality_error(svd.u), 1e-12);
  EXPECT_LE((svd.u * svd.s.asDiagonal() * svd.v.transpose() - m).norm(), 1e-12);
  EXPECT_NEAR(svd.s[0], std::sqrt(5.0), 1e-14);
  EXPECT_EQ(svd.s[1], 0.0);
}

TEST(DenseEigh, DiagonalInput) {
  const DataMatrix x = vrpca::testing::diagonal_data({0.5, 2.0, 1.0});
  const Spectrum spec = dense_eigh(x);
  EXPECT_NEAR(spec.eigenvalues()[0], 2.0, 1e-14);
  EXPECT_NEAR(spec.eigenvalues()[1], 1.0, 1e-14);
  EXPECT_NEAR(spec.eigenvalues()[2], 0.5, 1e-14);
  EXPECT_NEAR(std::abs(spec.eigenvectors().matrix()(1, 0)), 1.0, 1e-14);
}

TEST(DenseEigh, TwoByTwoByHand) {
  // Columns (sqrt3, sqrt3)/... chosen so that (1/n) X X^T = [[2,1],[1,2]].
  Matrix x(2, 2);
  x << std::sqrt(3.0), 1.0,
       std::sqrt(3.0), -1.0;
  const Spectrum spec = dense_eigh(DataMatrix(x));
  EXPECT_NEAR(spec.eigenvalues()[0], 3.0, 1e-14);
  EXPECT_NEAR(spec.eigenvalues()[1], 1.0, 1e-14);
  const Matrix& v = spec.eigenvectors().matrix();
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(v(0, 0)), h, 1e-14);
  EXPECT_NEAR(v(0, 0) * v(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(v(0, 1) * v(1, 1), -0.5, 1e-14);
}

TEST(DenseEigh, RandomReconstructionAndEigenpairs) {
  const DataMatrix x(gaussian_matrix(8, 30, 13));
  const Spectrum spec = dense_eigh(x);
  const Matrix a = materialize_covariance(x);
  const Matrix& v = spec.eigenvectors().matrix();
  EXPECT_LE((v * spec.eigenvalues().asDiagonal() * v.transpose() - a).norm(), 1e-10);
  const double scale = jacobi_eigh(a, false).values.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < 8; ++i) {
    EXPECT_LE((a * v.col(i) - spec.eigenvalues()[i] * v.col(i)).norm(), 1e-9 * scale);
  }
}

TEST(DenseEigh, GuardsLargeDimension) {
  const DataMatrix x(Matrix::Ones(kDenseOracleMaxDim + 1, 1));
  EXPECT_THROW(dense_eigh(x), ContractViolation);
}

TEST(Spectrum, GapAtMatchesStoredValues) {
  const Spectrum spec = dense_eigh(vrpca::testing::diagonal_data({1.0, 0.6, 0.25}));
  EXPECT_EQ(spec.gap_at(1), spec.eigenvalues()[0] - spec.eigenvalues()[1]);
  EXPECT_EQ(spec.gap_at(2), spec.eigenvalues()[1] - spec.eigenvalues()[2]);
  EXPECT_THROW(spec.gap_at(0), ContractViolation);
  EXPECT_THROW(spec.gap_at(3), ContractViolation);
}

TEST(LeadingSubspace, DiagonalInstance) {
  const Spectrum spec = dense_eigh(vrpca::testing::diagonal_data({3.0, 2.0, 1.0}));
  const LeadingSubspace lead = leading_subspace(spec, 2);
  EXPECT_FALSE(lead.warning.has_value());
  EXPECT_NEAR(potential(Matrix(Matrix::Identity(3, 2)), lead.frame.matrix()), 0.0, 1e-14);
}

TEST(LeadingSubspace, FlatSpectrumWarns) {
  const Spectrum spec = dense_eigh(vrpca::testing::diagonal_data({1.0, 1.0, 1.0}));
  const LeadingSubspace lead = leading_subspace(spec, 2);
  EXPECT_TRUE(lead.warning.has_value());
  EXPECT_LE(lead.frame.orthonormality_error(), 1e-12);
}

TEST(LeadingSubspace, AgreesWithOrthogonalIteration) {
  const SpectrumSpec spec{{1.0, 0.8, 0.5, 0.3, 0.2, 0.1}};
  const DataMatrix x = synthesize_dataset(spec, 40, 6);
  const OrthonormalFrame v = leading_subspace(dense_eigh(x), 2).frame;
  const OrthonormalFrame w0(random_frame(6, 2, 7));
  const ConvergenceTrace t = orthogonal_iteration(x, w0, 200, std::nullopt, false);
  EXPECT_LE(potential(v, *t.final_frame), 1e-8);
}

TEST(Synthesize, RecoversRequestedSpectrum) {
  const DataMatrix x = synthesize_dataset(SpectrumSpec{{1.0, 0.7, 0.4}}, 10, 1);
  const Spectrum spec = dense_eigh(x);
  EXPECT_NEAR(spec.eigenvalues()[0], 1.0, 1e-10);
  EXPECT_NEAR(spec.eigenvalues()[1], 0.7, 1e-10);
  EXPECT_NEAR(spec.eigenvalues()[2], 0.4, 1e-10);
}

TEST(Synthesize, GapRoundTrip) {
  const SpectrumSpec spec = SpectrumSpec::geometric_tail(12, 1.0, 0.7, 0.8);
  EXPECT_NEAR(spec.gap_at(1), 0.3, 1e-15);
  const Spectrum got = dense_eigh(synthesize_dataset(spec, 50, 2));
  EXPECT_NEAR(got.gap_at(1), 0.3, 1e-10);
}

TEST(Synthesize, RoundTripUpToDimensionFifty) {
  for (Eigen::Index d : {2, 7, 20, 50}) {
    const SpectrumSpec spec = SpectrumSpec::geometric_tail(d, 1.0, 0.7, 0.9);
    const Spectrum got = dense_eigh(synthesize_dataset(spec, 2 * d, 3 + static_cast<std::uint64_t>(d)));
    for (Eigen::Index i = 0; i < d; ++i) {
      EXPECT_NEAR(got.eigenvalues()[i], spec.eigenvalues[static_cast<std::size_t>(i)], 1e-10);
    }
  }
}

TEST(Synthesize, PlantedBasisIsTheEigenbasis) {
  const SpectrumSpec spec{{2.0, 1.0, 0.5, 0.25}};
  const SyntheticData out = synthesize_planted(spec, 9, 5);
  const Matrix a = materialize_covariance(out.data);
  const Matrix& q = out.basis.matrix();
  const Vector s = Eigen::Map<const Vector>(spec.eigenvalues.data(), 4);
  EXPECT_LE((q * s.asDiagonal() * q.transpose() - a).norm(), 1e-12);
}

TEST(Synthesize, Errors) {
  EXPECT_THROW(synthesize_dataset(SpectrumSpec{{0.0, 0.0}}, 5, 1), ContractViolation);
  EXPECT_THROW(synthesize_dataset(SpectrumSpec{{1.0, -0.1}}, 5, 1), ContractViolation);
  EXPECT_THROW(synthesize_dataset(SpectrumSpec{{1.0, 0.5, 0.2}}, 2, 1), ContractViolation);
}

TEST(Synthesize, SeedDeterminesData) {
  const SpectrumSpec spec{{1.0, 0.5, 0.1}};
  EXPECT_EQ(synthesize_dataset(spec, 6, 4).matrix(), synthesize_dataset(spec, 6, 4).matrix());
  EXPECT_NE(synthesize_dataset(spec, 6, 4).matrix(), synthesize_dataset(spec, 6, 5).matrix());
}
