#include <gtest/gtest.h>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/logistic.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "ccp3/ces_distributions.hpp"
#include "test_support.hpp"

using namespace ccp3;

namespace {

std::vector<double> probability_grid() {
  std::vector<double> ps;
  for (int i = 1; i <= 999; ++i) ps.push_back(i / 1000.0);
  return ps;
}

double boost_quantile(const CesFamily& f, double p) {
  namespace bm = boost::math;
  if (std::holds_alternative<Gaussian>(f)) return bm::quantile(bm::normal(), p);
  if (const auto* t = std::get_if<StudentT>(&f)) {
    const double q = bm::quantile(bm::students_t(t->nu), p);
    return t->nu > 2.0 ? q * std::sqrt((t->nu - 2.0) / t->nu) : q;
  }
  if (std::holds_alternative<Laplace>(f)) return bm::quantile(bm::laplace(0.0, 1.0 / std::numbers::sqrt2), p);
  if (std::holds_alternative<Logistic>(f))
    return bm::quantile(bm::logistic(0.0, std::sqrt(3.0) / std::numbers::pi), p);
  return bm::quantile(bm::cauchy(), p);
}

const std::vector<CesFamily>& closed_form_families() {
  static const std::vector<CesFamily> f{Gaussian{}, StudentT{4.0}, StudentT{2.5}, StudentT{1.0},
                                        Laplace{},  Logistic{},    Cauchy{}};
  return f;
}

}  // namespace

TEST(MarginalQuantile, Examples) {
  EXPECT_NEAR(marginal_quantile(Gaussian{}, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(marginal_quantile(Cauchy{}, 0.75), 1.0, 1e-12);
  EXPECT_NEAR(marginal_quantile(Gaussian{}, 0.975), 1.959963984540054, 1e-9);
}

TEST(MarginalQuantile, GaussianAgainstBisectionOnErf) {
  for (double p : {0.6, 0.8, 0.9, 0.95, 0.975, 0.99, 0.999}) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
    }
    EXPECT_NEAR(marginal_quantile(Gaussian{}, p), 0.5 * (lo + hi), 1e-9) << p;
  }
}

TEST(MarginalQuantile, MatchesBoost) {
  for (const auto& f : closed_form_families())
    for (double p : probability_grid()) {
      const double ref = boost_quantile(f, p);
      EXPECT_NEAR(marginal_quantile(f, p), ref, 1e-9 * std::max(1.0, std::abs(ref)))
          << family_name(f) << " p=" << p;
    }
}

TEST(MarginalQuantile, CdfRoundTrip) {
  for (const auto& f : closed_form_families())
    for (double p : probability_grid())
      EXPECT_NEAR(marginal_cdf(f, marginal_quantile(f, p)), p, 1e-8) << family_name(f) << " p=" << p;
}

TEST(MarginalQuantile, CauchyIsStudentTOne) {
  for (double p : probability_grid()) EXPECT_NEAR(marginal_quantile(Cauchy{}, p), marginal_quantile(StudentT{1.0}, p), 1e-12);
}

TEST(MarginalQuantile, FamiliesHaveUnitVariance) {
  // Numerical second moment of the density on a wide grid.
  for (const CesFamily f : {CesFamily{Gaussian{}}, CesFamily{StudentT{6.0}}, CesFamily{Laplace{}}, CesFamily{Logistic{}}}) {
    double var = 0.0;
    const double h = 1e-3;
    for (double x = -60.0; x <= 60.0; x += h) var += x * x * marginal_pdf(f, x) * h;
    EXPECT_NEAR(var, 1.0, 2e-3) << family_name(f);
  }
}

TEST(MarginalQuantile, RejectsBadInput) {
  EXPECT_THROW(marginal_quantile(Gaussian{}, 0.0), std::invalid_argument);
  EXPECT_THROW(marginal_quantile(Gaussian{}, 1.0), std::invalid_argument);
  EXPECT_THROW(marginal_quantile(StudentT{-1.0}, 0.7), std::invalid_argument);
  EXPECT_THROW(canonical(GeneralizedGaussian{0.0, 1.0}), std::invalid_argument);
}

TEST(Sampler, DegenerateTripleReturnsMean) {
  std::mt19937_64 rng(1);
  const ComplexVec mu = ccp3::testing::random_vec(3, rng);
  const auto xs = sample_complex(StudentT{4.0}, MomentTriple::point(mu), 50, {7, 0});
  for (const auto& x : xs) EXPECT_LE((x - mu).norm(), 1e-15);
}

TEST(Sampler, ProperScalarSplitsVariance) {
  const auto xs = sample_complex(Gaussian{}, MomentTriple::proper(ComplexVec::Zero(1), ComplexMat::Identity(1, 1)),
                                 200000, {11, 0});
  double vr = 0.0, vi = 0.0;
  for (const auto& x : xs) {
    vr += x(0).real() * x(0).real();
    vi += x(0).imag() * x(0).imag();
  }
  EXPECT_NEAR(vr / xs.size(), 0.5, 0.01);
  EXPECT_NEAR(vi / xs.size(), 0.5, 0.01);
}

TEST(Sampler, StudentTReproducesMoments) {
  std::mt19937_64 rng(21);
  const MomentTriple m = ccp3::testing::random_triple(3, rng);
  const long long count = 1000000;
  const auto xs = sample_complex(StudentT{4.0}, m, count, {5, 2});
  ComplexVec mean = ComplexVec::Zero(3);
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(count);
  ComplexMat cov = ComplexMat::Zero(3, 3), pcov = ComplexMat::Zero(3, 3);
  for (const auto& x : xs) {
    const ComplexVec d = x - m.mean;
    cov += d * d.adjoint();
    pcov += d * d.transpose();
  }
  cov /= static_cast<double>(count);
  pcov /= static_cast<double>(count);
  EXPECT_LE((mean - m.mean).norm(), 0.02 * std::sqrt(m.cov.trace().real()));
  EXPECT_LE((cov - m.cov).norm(), 0.02 * m.cov.norm());
  EXPECT_LE((pcov - m.pcov).norm(), 0.02 * m.cov.norm());
}

TEST(Sampler, ProjectionsFollowTheMarginal) {
  std::mt19937_64 rng(33);
  const MomentTriple m = ccp3::testing::random_triple(2, rng);
  const RealMat k = augmented_covariance(m.cov, m.pcov);
  const ComplexVec z = ccp3::testing::random_vec(2, rng);
  const RealVec w = stack(z);
  const double sd = std::sqrt(w.dot(k * w));
  for (const auto& f : closed_form_families()) {
    if (const auto* t = std::get_if<StudentT>(&f); t && t->nu != 4.0) continue;
    const auto xs = sample_complex(f, m, 100000, {3, 9});
    std::vector<double> u;
    for (const auto& x : xs) u.push_back(w.dot(stack(x - m.mean)) / sd);
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double F = marginal_cdf(f, u[i]);
      ks = std::max({ks, std::abs(F - double(i) / u.size()), std::abs(F - double(i + 1) / u.size())});
    }
    // Kolmogorov 0.999 critical value is 1.95 / sqrt(S).
    EXPECT_LE(ks, 1.95 / std::sqrt(100000.0)) << family_name(f);
  }
}

TEST(Sampler, ReproducibleAndStreamsDiffer) {
  std::mt19937_64 rng(2);
  const MomentTriple m = ccp3::testing::random_triple(2, rng);
  for (const auto& f : closed_form_families()) {
    const auto a = sample_complex(f, m, 100, {42, 3});
    const auto b = sample_complex(f, m, 100, {42, 3});
    const auto c = sample_complex(f, m, 100, {42, 4});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
    EXPECT_NE(a[0], c[0]);
  }
}

TEST(Sampler, CauchyTagMatchesStudentTOneSamples) {
  std::mt19937_64 rng(4);
  const MomentTriple m = ccp3::testing::random_triple(2, rng);
  const auto a = sample_complex(Cauchy{}, m, 50, {8, 1});
  const auto b = sample_complex(StudentT{1.0}, m, 50, {8, 1});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Sampler, AffineClosure) {
  std::mt19937_64 rng(44);
  const MomentTriple m = ccp3::testing::random_triple(2, rng);
  const ComplexMat A = ccp3::testing::random_complex(2, 2, rng);
  const ComplexVec b = ccp3::testing::random_vec(2, rng);
  const ComplexMat target_cov = A * m.cov * A.adjoint();
  const ComplexMat target_pcov = A * m.pcov * A.transpose();
  const long long count = 400000;
  const auto xs = sample_complex(Laplace{}, m, count, {1, 1});
  ComplexVec mean = ComplexVec::Zero(2);
  ComplexMat cov = ComplexMat::Zero(2, 2), pcov = ComplexMat::Zero(2, 2);
  for (const auto& x : xs) mean += A * x + b;
  mean /= double(count);
  for (const auto& x : xs) {
    const ComplexVec d = A * x + b - mean;
    cov += d * d.adjoint();
    pcov += d * d.transpose();
  }
  cov /= double(count);
  pcov /= double(count);
  EXPECT_LE((mean - (A * m.mean + b)).norm(), 0.02 * std::sqrt(target_cov.trace().real()));
  EXPECT_LE((cov - target_cov).norm(), 0.03 * target_cov.norm());
  EXPECT_LE((pcov - target_pcov).norm(), 0.03 * target_cov.norm());
}

TEST(Sampler, GeneralizedGaussianHasUnitStandardization) {
  std::mt19937_64 rng(5);
  const MomentTriple m = MomentTriple::proper(ComplexVec::Zero(2), ComplexMat::Identity(2, 2));
  CesSampler s(GeneralizedGaussian{0.7, 1.0}, m);
  const RealMat xi = s.draw_standard(200000, rng);
  const double second = xi.array().square().mean();
  EXPECT_NEAR(second, 1.0, 0.02);
}
