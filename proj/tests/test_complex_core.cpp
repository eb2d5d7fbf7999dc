#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccp3/complex_core.hpp"
#include "test_support.hpp"

using namespace ccp3;
using ccp3::testing::random_complex;
using ccp3::testing::random_triple;
using ccp3::testing::random_vec;

namespace {

ComplexMat scalar(Complex v) {
  ComplexMat m(1, 1);
  m(0, 0) = v;
  return m;
}

// Widely linear construction d = mu + P x + Q conj(x), x proper standard
// normal. Gives Gamma = P P^H + Q Q^H and J = P Q^T + Q P^T without going
// through the augmented matrix.
struct WidelyLinear {
  ComplexVec mu;
  ComplexMat P, Q;

  MomentTriple moments() const {
    return {mu, P * P.adjoint() + Q * Q.adjoint(), P * Q.transpose() + Q * P.transpose()};
  }
  ComplexVec draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    ComplexVec x(P.cols());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = Complex(g(rng), g(rng));
    return mu + P * x + Q * x.conjugate();
  }
};

WidelyLinear random_widely_linear(Eigen::Index n, std::mt19937_64& rng) {
  return {random_vec(n, rng), random_complex(n, n, rng) * 0.5, random_complex(n, n, rng) * 0.3};
}

}  // namespace

TEST(AugmentedCovariance, ProperScalarSplitsEvenly) {
  const RealMat k = augmented_covariance(scalar(1.0), scalar(0.0));
  EXPECT_NEAR(k(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(k(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(k(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(k(1, 0), 0.0, 1e-15);
}

TEST(AugmentedCovariance, RealScalarHasNoImaginaryVariance) {
  const RealMat k = augmented_covariance(scalar(2.0), scalar(2.0));
  EXPECT_NEAR(k(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(k(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(k(0, 1), 0.0, 1e-15);
}

TEST(AugmentedCovariance, QuadraticFormIdentity) {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 10; ++inst) {
    const MomentTriple m = random_triple(3, rng);
    const RealMat k = augmented_covariance(m.cov, m.pcov);
    for (int t = 0; t < 100; ++t) {
      const ComplexVec z = random_vec(3, rng);
      const RealVec w = stack(z);
      const double lhs = w.dot(k * w);
      const double rhs = 0.5 * (z.dot(m.cov * z).real() + (z.adjoint() * m.pcov * z.conjugate()).value().real());
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(AugmentedCovariance, ProperCaseHasEqualDiagonalBlocks) {
  std::mt19937_64 rng(5);
  const MomentTriple m = random_triple(4, rng, 0.0);
  const RealMat k = augmented_covariance(m.cov, m.pcov);
  EXPECT_LE((k.topLeftCorner(4, 4) - k.bottomRightCorner(4, 4)).norm(), 1e-14);
  EXPECT_LE((k.topLeftCorner(4, 4) - 0.5 * m.cov.real()).norm(), 1e-14);
  EXPECT_LE((k.topRightCorner(4, 4) + k.bottomLeftCorner(4, 4)).norm(), 1e-14);
}

TEST(AugmentedCovariance, InverseMapRoundTrips) {
  std::mt19937_64 rng(9);
  const MomentTriple m = random_triple(3, rng);
  const auto [cov, pcov] = complex_moments_from_augmented(augmented_covariance(m.cov, m.pcov));
  EXPECT_LE((cov - m.cov).norm(), 1e-13);
  EXPECT_LE((pcov - m.pcov).norm(), 1e-13);
}

TEST(ObjectiveStats, ZeroDecision) {
  std::mt19937_64 rng(1);
  const MomentTriple c = random_triple(3, rng);
  const AffineStats s = objective_stats(c, ComplexVec::Zero(3));
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.variance, 0.0);
}

TEST(ObjectiveStats, IdentityCovarianceGivesHalfSquaredNorm) {
  std::mt19937_64 rng(2);
  const ComplexVec z = random_vec(4, rng);
  const MomentTriple c = MomentTriple::proper(ComplexVec::Zero(4), ComplexMat::Identity(4, 4));
  EXPECT_NEAR(objective_stats(c, z).variance, 0.5 * z.squaredNorm(), 1e-12);
}

TEST(ObjectiveStats, MatchesMonteCarlo) {
  std::mt19937_64 rng(3);
  const WidelyLinear law = random_widely_linear(3, rng);
  const ComplexVec z = random_vec(3, rng);
  const AffineStats s = objective_stats(law.moments(), z);
  const int draws = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double v = law.draw(rng).dot(z).real();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  EXPECT_NEAR(mean, s.mean, 0.01 * std::sqrt(s.variance) + 0.01 * std::abs(s.mean));
  EXPECT_NEAR(var, s.variance, 0.01 * s.variance);
}

TEST(ConstraintStats, ZeroDecision) {
  std::mt19937_64 rng(4);
  const ConstraintRow row = ccp3::testing::random_row(3, rng, 2.5, 0.7);
  const AffineStats s = constraint_stats(row, ComplexVec::Zero(3));
  EXPECT_DOUBLE_EQ(s.mean, -2.5);
  EXPECT_DOUBLE_EQ(s.variance, 0.7);
}

TEST(ConstraintStats, IdentityCovarianceGivesHalfSquaredNorm) {
  std::mt19937_64 rng(6);
  ConstraintRow row;
  row.a = MomentTriple::proper(ComplexVec::Zero(3), ComplexMat::Identity(3, 3));
  const ComplexVec z = random_vec(3, rng);
  EXPECT_NEAR(constraint_stats(row, z).variance, 0.5 * z.squaredNorm(), 1e-12);
}

TEST(ConstraintStats, MatchesMonteCarlo) {
  std::mt19937_64 rng(8);
  const WidelyLinear law = random_widely_linear(2, rng);
  ConstraintRow row;
  row.a = law.moments();
  row.b_mean = 1.3;
  row.b_var = 0.4;
  const ComplexVec z = random_vec(2, rng);
  const AffineStats s = constraint_stats(row, z);
  std::normal_distribution<double> g;
  const int draws = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const ComplexVec a = law.draw(rng);
    const double b = row.b_mean + std::sqrt(row.b_var) * g(rng);
    const double v = (a.transpose() * z).value().real() - b;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  EXPECT_NEAR(mean, s.mean, 0.01 * std::abs(s.mean));
  EXPECT_NEAR(var, s.variance, 0.01 * s.variance);
}

TEST(ConstraintStats, VariancesNonNegative) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 200; ++t) {
    const ConstraintRow row = ccp3::testing::random_row(3, rng);
    ASSERT_TRUE(validate_moment_triple(row.a).ok());
    const ComplexVec z = random_vec(3, rng);
    EXPECT_GE(constraint_stats(row, z).variance, 0.0);
    EXPECT_GE(objective_stats(row.a, z).variance, 0.0);
  }
}

TEST(ValidateMomentTriple, AcceptsProperIdentity) {
  EXPECT_TRUE(validate_moment_triple(MomentTriple::proper(ComplexVec::Zero(2), ComplexMat::Identity(2, 2))).ok());
}

TEST(ValidateMomentTriple, RejectsOversizedPseudoCovariance) {
  const MomentTriple m{ComplexVec::Zero(1), scalar(1.0), scalar(2.0)};
  const auto d = validate_moment_triple(m);
  ASSERT_FALSE(d.ok());
  EXPECT_NE(d.problem->find("indefinite"), std::string::npos);
  EXPECT_NE(d.problem->find("-0.5"), std::string::npos);
  const RealMat k = augmented_covariance(m.cov, m.pcov);
  EXPECT_NEAR(k(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(k(1, 1), -0.5, 1e-15);
}

TEST(ValidateMomentTriple, NamesNonHermitianEntry) {
  MomentTriple m = MomentTriple::proper(ComplexVec::Zero(3), ComplexMat::Identity(3, 3));
  m.cov(1, 2) = Complex(1e-3, 0.0);
  const auto d = validate_moment_triple(m);
  ASSERT_FALSE(d.ok());
  EXPECT_NE(d.problem->find("Hermitian"), std::string::npos);
  EXPECT_TRUE(d.problem->find("cov(1,2)") != std::string::npos || d.problem->find("cov(2,1)") != std::string::npos)
      << *d.problem;
}

TEST(ValidateMomentTriple, RejectsWrongShapes) {
  MomentTriple m = MomentTriple::proper(ComplexVec::Zero(2), ComplexMat::Identity(3, 3));
  EXPECT_FALSE(validate_moment_triple(m).ok());
  EXPECT_FALSE(validate_moment_triple(MomentTriple{}).ok());
}

TEST(PsdFactor, ReproducesMatrix) {
  std::mt19937_64 rng(12);
  const MomentTriple m = random_triple(3, rng);
  const RealMat k = augmented_covariance(m.cov, m.pcov);
  const RealMat f = psd_factor(k);
  EXPECT_LE((f.transpose() * f - k).norm(), 1e-12);
  const RealMat s = psd_sqrt(k);
  EXPECT_LE((s * s - k).norm(), 1e-12);
}

TEST(Stacking, ConjugateStackMatchesConjugate) {
  std::mt19937_64 rng(13);
  const ComplexVec z = random_vec(5, rng);
  EXPECT_EQ(stack_conj(z), stack(z.conjugate()));
  EXPECT_EQ(unstack(stack(z)), z);
  const ComplexMat a = random_complex(3, 5, rng);
  EXPECT_LE((real_representation(a) * stack(z) - stack(a * z)).norm(), 1e-12);
}
