#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "ccp3/beamforming.hpp"
#include "ccp3/ces_distributions.hpp"
#include "test_support.hpp"

using namespace ccp3;

namespace {

MomentTriple mismatch_moments(Eigen::Index M, double power) {
  return MomentTriple::proper(ComplexVec::Zero(M), (power / M) * ComplexMat::Identity(M, M));
}

struct Setting {
  ArrayModel model;
  ComplexMat R = interference_noise_cov(model);
  ComplexVec a = ula_steering(model, model.signal_doa);
};

}  // namespace

TEST(Steering, BroadsideIsAllOnes) {
  ArrayModel m;
  const ComplexVec a = ula_steering(m, 0.0);
  EXPECT_LE((a - ComplexVec::Ones(m.M)).norm(), 1e-15);
  const ComplexVec b = ula_steering(m, 30.0);
  EXPECT_NEAR(std::arg(b(1)), std::numbers::pi * 0.5, 1e-12);
  for (Eigen::Index k = 0; k < m.M; ++k) EXPECT_NEAR(std::abs(b(k)), 1.0, 1e-15);
}

TEST(Covariance, NoInterferersIsWhiteNoise) {
  ArrayModel m;
  m.interferer_doas.clear();
  m.interferer_inr_db.clear();
  m.noise_power = 2.5;
  EXPECT_LE((interference_noise_cov(m) - 2.5 * ComplexMat::Identity(m.M, m.M)).norm(), 1e-15);
}

TEST(Covariance, StrongInterfererDominates) {
  ArrayModel m;
  m.interferer_doas = {20.0};
  m.interferer_inr_db = {60.0};
  Eigen::SelfAdjointEigenSolver<ComplexMat> es(interference_noise_cov(m));
  const ComplexVec top = es.eigenvectors().col(m.M - 1);
  const ComplexVec a = ula_steering(m, 20.0);
  EXPECT_NEAR(std::abs(top.dot(a)) / a.norm(), 1.0, 1e-9);
}

TEST(Covariance, DefaultSettingIsWellConditioned) {
  for (const std::vector<double>& inr : {std::vector<double>{15.0, 15.0}, std::vector<double>{15.0, 25.0}}) {
    ArrayModel m;
    m.interferer_inr_db = inr;
    Eigen::SelfAdjointEigenSolver<ComplexMat> es(interference_noise_cov(m));
    EXPECT_GT(es.eigenvalues()(0), 0.0);
    EXPECT_TRUE(std::isfinite(es.eigenvalues()(m.M - 1) / es.eigenvalues()(0)));
  }
}

TEST(ArrayModel, Validation) {
  ArrayModel m;
  m.M = 1;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = ArrayModel{};
  m.interferer_inr_db.pop_back();
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ClosedForm, IdentityCovariance) {
  Setting s;
  const BeamformerResult r = mvdr_closed_form(ComplexMat::Identity(s.model.M, s.model.M), s.a);
  EXPECT_LE((r.w - s.a / double(s.model.M)).norm(), 1e-14);
}

TEST(ClosedForm, DistortionlessAndMinimal) {
  Setting s;
  const BeamformerResult r = mvdr_closed_form(s.R, s.a);
  EXPECT_NEAR(std::abs(r.w.dot(s.a) - 1.0), 0.0, 1e-12);
  EXPECT_LE(r.distortionless_residual, 1e-12);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    // Any w with a^H w = 1: project a random vector onto the constraint.
    const ComplexVec v = ccp3::testing::random_vec(s.model.M, rng);
    const ComplexVec w = v + s.a * ((1.0 - s.a.dot(v)) / s.a.squaredNorm());
    ASSERT_NEAR(std::abs(s.a.dot(w) - 1.0), 0.0, 1e-12);
    EXPECT_LE(r.objective, w.dot(s.R * w).real() + 1e-12);
  }
  EXPECT_THROW(mvdr_closed_form(-s.R, s.a), std::invalid_argument);
}

TEST(RobustMvdr, NoMismatchReducesToClosedForm) {
  Setting s;
  const BeamformerResult cf = mvdr_closed_form(s.R, s.a);
  const BeamformerResult a = robust_mvdr(s.R, s.a, mismatch_moments(s.model.M, 0.0), 0.9, MvdrMode::MomentExact);
  EXPECT_EQ(a.status, "optimal");
  EXPECT_LE((a.w - cf.w).cwiseAbs().maxCoeff(), 1e-6);
  const BeamformerResult b = robust_mvdr(s.R, s.a, mismatch_moments(s.model.M, 1.0), 0.5, MvdrMode::Gaussian);
  EXPECT_LE((b.w - cf.w).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RobustMvdr, DistortionlessFeasibility) {
  Setting s;
  const MomentTriple mm = mismatch_moments(s.model.M, 1.0);
  const ComplexMat root = hermitian_sqrt(mm.cov);
  for (MvdrMode mode : {MvdrMode::Gaussian, MvdrMode::MomentExact})
    for (MismatchScale scale : {MismatchScale::Exact, MismatchScale::Halved})
      for (double p : {0.6, 0.7, 0.9}) {
        RobustMvdrOptions o;
        o.scale = scale;
        const BeamformerResult r = robust_mvdr(s.R, s.a, mm, p, mode, o);
        ASSERT_EQ(r.status, "optimal");
        const Complex g = s.a.dot(r.w);
        const double k = mvdr_safety_factor(mode, p);
        EXPECT_GE(g.real(), 1.0 + k * (root * r.w).norm() / 2.0 - 1e-7);
        EXPECT_LE(std::abs(g.imag()), 1e-7);
      }
}

TEST(RobustMvdr, MismatchRobustness) {
  Setting s;
  const double p = 0.7;
  const MomentTriple mm = mismatch_moments(s.model.M, 1.0);
  const BeamformerResult r = robust_mvdr(s.R, s.a, mm, p, MvdrMode::Gaussian);
  const long long S = 10000;
  const auto deltas = sample_complex(Gaussian{}, mm, S, {12, 0});
  long long ok = 0;
  for (const auto& d : deltas) ok += (s.a + d).dot(r.w).real() >= 1.0;
  const double rate = double(ok) / S;
  EXPECT_GE(rate, p - 2.0 * std::sqrt(p * (1 - p) / S));
}

TEST(RobustMvdr, MomentExactIsMoreConservative) {
  Setting s;
  const MomentTriple mm = mismatch_moments(s.model.M, 1.0);
  for (double p : {0.6, 0.7, 0.9}) {
    const auto g = robust_mvdr(s.R, s.a, mm, p, MvdrMode::Gaussian);
    const auto e = robust_mvdr(s.R, s.a, mm, p, MvdrMode::MomentExact);
    EXPECT_GE(e.objective, g.objective - 1e-7);
  }
}

TEST(RobustMvdr, DataDrivenRadiiIncreaseCost) {
  Setting s;
  const MomentTriple mm = mismatch_moments(s.model.M, 1.0);
  RobustMvdrOptions o;
  const auto base = robust_mvdr(s.R, s.a, mm, 0.7, MvdrMode::DataDriven, o);
  o.r1 = 0.05;
  o.r2 = 0.02;
  const auto wide = robust_mvdr(s.R, s.a, mm, 0.7, MvdrMode::DataDriven, o);
  const auto exact = robust_mvdr(s.R, s.a, mm, 0.7, MvdrMode::MomentExact);
  EXPECT_NEAR(base.objective, exact.objective, 1e-7 * (1 + exact.objective));
  EXPECT_GT(wide.objective, base.objective);
}

TEST(RobustMvdr, RejectsBadInput) {
  Setting s;
  EXPECT_THROW(robust_mvdr(s.R, s.a, mismatch_moments(3, 1.0), 0.7, MvdrMode::Gaussian), std::invalid_argument);
  RobustMvdrOptions o;
  o.r1 = -1.0;
  EXPECT_THROW(robust_mvdr(s.R, s.a, mismatch_moments(s.model.M, 1.0), 0.7, MvdrMode::DataDriven, o),
               std::invalid_argument);
}

TEST(Sweep, SmallRunIsDeterministicAndOrdered) {
  SweepConfig cfg;
  cfg.trials = 5;
  cfg.snr_db = {-10.0, 10.0, 30.0};
  cfg.estimation_samples = {1000};
  cfg.include_snapshot = false;
  const auto a = snr_sweep(cfg);
  const auto b = snr_sweep(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mode, b[i].mode);
    EXPECT_EQ(a[i].sinr_db, b[i].sinr_db);
  }
  std::map<std::string, std::vector<double>> curves;
  for (const auto& r : a) curves[r.mode].push_back(r.sinr_db);
  ASSERT_EQ(curves.size(), 5u);
  for (auto& [mode, v] : curves) {
    ASSERT_EQ(v.size(), 3u) << mode;
    if (mode == "mvdr_mismatched") continue;
    EXPECT_LE(v[0], v[1]) << mode;
    EXPECT_LE(v[1], v[2]) << mode;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LE(curves["known_moments"][k], curves["optimal"][k] + 1e-9);
    EXPECT_LE(curves["true_gaussian"][k], curves["optimal"][k] + 1e-9);
  }
}
