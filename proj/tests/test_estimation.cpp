#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ccp3/ces_distributions.hpp"
#include "ccp3/estimation.hpp"
#include "test_support.hpp"

using namespace ccp3;

namespace {

SampleSet draw(const MomentTriple& m, long long n, SeededStream s) {
  return {sample_complex(Gaussian{}, m, n, s)};
}

}  // namespace

TEST(EmpiricalMoments, ConstantSamples) {
  std::mt19937_64 rng(1);
  const ComplexVec mu = ccp3::testing::random_vec(3, rng);
  const MomentTriple m = empirical_moments({std::vector<ComplexVec>(10, mu)});
  EXPECT_LE((m.mean - mu).norm(), 1e-15);
  EXPECT_LE(m.cov.norm(), 1e-14);
  EXPECT_LE(m.pcov.norm(), 1e-14);
}

TEST(EmpiricalMoments, TwoOppositeSamples) {
  std::mt19937_64 rng(2);
  const ComplexVec v = ccp3::testing::random_vec(3, rng);
  const MomentTriple m = empirical_moments({{v, ComplexVec(-v)}});
  EXPECT_LE(m.mean.norm(), 1e-15);
  EXPECT_LE((m.cov - v * v.adjoint()).norm(), 1e-14);
  EXPECT_LE((m.pcov - v * v.transpose()).norm(), 1e-14);
}

TEST(EmpiricalMoments, ConvergesOnLargeSamples) {
  std::mt19937_64 rng(3);
  const MomentTriple t = ccp3::testing::random_triple(3, rng);
  const MomentTriple m = empirical_moments(draw(t, 1000000, {3, 0}));
  EXPECT_LE((m.cov - t.cov).norm(), 0.01 * t.cov.norm());
  EXPECT_LE((m.pcov - t.pcov).norm(), 0.01 * t.cov.norm());
  EXPECT_LE((m.mean - t.mean).norm(), 0.01 * std::sqrt(t.cov.trace().real()));
}

TEST(EmpiricalMoments, AccumulatorMatchesBatchEstimator) {
  std::mt19937_64 rng(4);
  const MomentTriple t = ccp3::testing::random_triple(4, rng);
  const SampleSet s = draw(t, 5000, {4, 1});
  MomentAccumulator acc(4);
  for (std::size_t k = 0; k < s.size(); k += 700) {
    const std::size_t e = std::min(s.size(), k + 700);
    ComplexMat cols(4, static_cast<Eigen::Index>(e - k));
    for (std::size_t i = k; i < e; ++i) cols.col(static_cast<Eigen::Index>(i - k)) = s.samples[i];
    acc.add(cols);
  }
  const MomentTriple a = acc.moments();
  const MomentTriple b = empirical_moments(s);
  EXPECT_EQ(acc.count(), 5000);
  EXPECT_LE((a.mean - b.mean).norm(), 1e-12);
  EXPECT_LE((a.cov - b.cov).norm(), 1e-12);
  EXPECT_LE((a.pcov - b.pcov).norm(), 1e-12);
  EXPECT_NEAR(acc.max_norm(), support_radius(s), 1e-12);
}

TEST(EmpiricalMoments, OutputIsValidTriple) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const MomentTriple m = ccp3::testing::random_triple(3, rng, 0.5);
    EXPECT_TRUE(validate_moment_triple(empirical_moments(draw(m, 5 + t, {5, std::uint64_t(t)}))).ok());
  }
}

TEST(ConcentrationRadii, Examples) {
  const auto r = concentration_radii(1.0, 10000, 0.05);
  const double factor = 2.0 + std::sqrt(2.0 * std::log(120.0));
  EXPECT_NEAR(r.r1, 0.01 * factor, 1e-15);
  EXPECT_NEAR(r.r1, 0.050943, 1e-6);
  EXPECT_NEAR(r.r2, 0.101886, 1e-6);
  EXPECT_EQ(r.min_n, 26);
  EXPECT_FALSE(r.below_min_n);
  const auto q = concentration_radii(1.0, 40000, 0.05);
  EXPECT_DOUBLE_EQ(q.r1, r.r1 / 2);
  EXPECT_DOUBLE_EQ(q.r2, r.r2 / 2);
  EXPECT_TRUE(concentration_radii(1.0, 25, 0.05).below_min_n);
  EXPECT_THROW(concentration_radii(0.0, 10, 0.05), std::invalid_argument);
  EXPECT_THROW(concentration_radii(1.0, 10, 1.0), std::invalid_argument);
}

TEST(SupportRadius, Examples) {
  ComplexVec v(2);
  v << Complex(3.0, 0.0), Complex(0.0, 4.0);
  EXPECT_DOUBLE_EQ(support_radius({{v}}), 5.0);
  SampleSet circle;
  for (int k = 0; k < 16; ++k) circle.samples.push_back(ComplexVec::Constant(1, std::polar(1.0, 0.4 * k)));
  EXPECT_NEAR(support_radius(circle), 1.0, 1e-15);
}

TEST(EstimateWithRadii, WarnsWithoutSupportRadius) {
  std::mt19937_64 rng(6);
  const SampleSet s = draw(ccp3::testing::random_triple(2, rng), 10, {6, 0});
  const auto est = estimate_with_radii(s, 0.05);
  EXPECT_TRUE(est.support_estimated);
  EXPECT_TRUE(est.below_min_n);
  EXPECT_EQ(est.warnings.size(), 2u);
  const auto known = estimate_with_radii(s, 0.05, 10.0);
  EXPECT_FALSE(known.support_estimated);
  EXPECT_DOUBLE_EQ(known.r1, concentration_radii(10.0, 10, 0.05).r1);
  const DataDrivenRow row = to_data_driven_row(known);
  EXPECT_EQ(row.r1, known.r1);
  EXPECT_EQ(row.r2, known.r2);
}

TEST(Samples, ReadWriteRoundTrip) {
  std::mt19937_64 rng(7);
  const SampleSet s = draw(ccp3::testing::random_triple(3, rng), 25, {7, 0});
  std::stringstream io;
  io << "# header\n\n";
  write_samples(io, s);
  const SampleSet back = read_samples(io);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back.samples[i], s.samples[i]);
}

TEST(Samples, RejectsMalformedInput) {
  std::stringstream odd("1 2 3\n");
  EXPECT_THROW(read_samples(odd), std::invalid_argument);
  std::stringstream ragged("1 2 3 4\n1 2\n");
  EXPECT_THROW(read_samples(ragged), std::invalid_argument);
  std::stringstream junk("1 x\n");
  EXPECT_THROW(read_samples(junk), std::invalid_argument);
  std::stringstream empty("# nothing\n");
  EXPECT_THROW(read_samples(empty), std::invalid_argument);
}

// Short version of the coverage study; the full one runs in the acceptance suite.
TEST(Coverage, RadiiCoverEstimationError) {
  std::mt19937_64 rng(8);
  const MomentTriple t = ccp3::testing::random_triple(3, rng);
  int mean_ok = 0, cov_ok = 0, pcov_ok = 0;
  const int trials = 50;
  for (int k = 0; k < trials; ++k) {
    const SampleSet s = draw(t, 1000, SeededStream{8, 1}.substream(k));
    const auto est = estimate_with_radii(s, 0.05);
    mean_ok += (est.triple.mean - t.mean).norm() <= est.r1;
    cov_ok += (est.triple.cov - t.cov).norm() <= est.r2;
    pcov_ok += (est.triple.pcov - t.pcov).norm() <= est.r2;
  }
  EXPECT_GE(mean_ok, 0.95 * trials);
  EXPECT_GE(cov_ok, 0.95 * trials);
  EXPECT_GE(pcov_ok, 0.95 * trials);
}
