#include <gtest/gtest.h>

#include <cmath>

#include "ccp3/beamforming.hpp"
#include "ccp3/socp_solver.hpp"
#include "regression_set.hpp"

using namespace ccp3;
using ccp3::testing::regression_set;

namespace {

SocpProblem norm_problem(const RealVec& v) {
  SocpProblem p(1);
  p.objective(0) = 1.0;
  RealVec c(1);
  c << 1.0;
  p.cone_blocks.push_back(ConeBlock::from_dense(RealMat::Zero(v.size(), 1), v, c, 0.0));
  return p;
}

SocpProblem abs_problem() {
  SocpProblem p(1);
  p.objective(0) = 1.0;
  RealMat A(1, 1);
  A << 1.0;
  RealVec b(1), c(1);
  b << -1.0;
  c << 1.0;
  p.cone_blocks.push_back(ConeBlock::from_dense(A, b, c, 0.0));
  return p;
}

}  // namespace

TEST(Solve, NormEpigraph) {
  RealVec v(4);
  v << 1.0, -2.0, 2.0, 4.0;
  const SocpSolution s = solve(norm_problem(v), 1e-9);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 5.0, 1e-7);
}

TEST(Solve, AbsoluteValueCone) {
  const SocpSolution s = solve(abs_problem(), 1e-9);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 0.5, 1e-7);
}

TEST(Solve, DetectsInfeasibility) {
  SocpProblem p(1);
  p.objective(0) = 1.0;
  p.nonneg_indices = {0};
  RealVec c(1);
  c << -1.0;
  p.cone_blocks.push_back(ConeBlock::linear(c, -1.0));  // -x - 1 >= 0
  EXPECT_EQ(solve(p, 1e-8).status, SolveStatus::Infeasible);

  SocpProblem q = norm_problem(RealVec::Ones(2));
  q.add_equality({{0, 0, 1.0}}, 1.0);  // t = 1 < sqrt(2)
  EXPECT_EQ(solve(q, 1e-8).status, SolveStatus::Infeasible);
}

TEST(Solve, DetectsUnboundedness) {
  SocpProblem p(2);
  p.objective << -1.0, 0.0;
  p.nonneg_indices = {0, 1};
  EXPECT_EQ(solve(p, 1e-8).status, SolveStatus::Unbounded);
}

TEST(Solve, RejectsBadOptions) {
  EXPECT_THROW(solve(abs_problem(), SolverOptions{1e-2, 200, "reference"}), std::invalid_argument);
  EXPECT_THROW(solve(abs_problem(), SolverOptions{1e-8, 200, "nope"}), std::invalid_argument);
  SocpProblem bad(2);
  bad.objective = RealVec::Zero(3);
  EXPECT_THROW(solve(bad, 1e-8), std::invalid_argument);
}

TEST(Solve, RegressionSetIsCertified) {
  for (const auto& rc : regression_set()) {
    const SocpSolution s = solve(rc.problem, 1e-8);
    ASSERT_EQ(s.status, SolveStatus::Optimal) << rc.name;
    const Residuals r = residuals(rc.problem, s);
    EXPECT_LE(r.primal, 1e-8) << rc.name;
    EXPECT_LE(r.dual, 1e-8) << rc.name;
    EXPECT_LE(r.gap, 1e-8) << rc.name;
    EXPECT_NEAR(r.primal, s.primal_residual, 1e-9) << rc.name;
    EXPECT_NEAR(r.dual, s.dual_residual, 1e-9) << rc.name;
    EXPECT_NEAR(r.gap, s.duality_gap, 1e-9) << rc.name;
  }
}

TEST(Solve, BackendsAgree) {
  const double tol = 1e-8;
  for (const auto& rc : regression_set()) {
    if (rc.problem.nvars > 400) continue;
    const SocpSolution a = solve(rc.problem, SolverOptions{tol, 200, "reference"});
    const SocpSolution b = solve(rc.problem, SolverOptions{tol, 200, "dense"});
    ASSERT_EQ(a.status, SolveStatus::Optimal) << rc.name;
    ASSERT_EQ(b.status, SolveStatus::Optimal) << rc.name;
    EXPECT_LE(std::abs(a.objective_value - b.objective_value), 10 * tol * (1 + std::abs(a.objective_value)))
        << rc.name;
  }
}

TEST(Solve, CustomBackendIsDispatched) {
  int calls = 0;
  register_backend("counting", [&calls](const SocpProblem& p, const SolverOptions& o) {
    ++calls;
    SolverOptions inner = o;
    inner.backend = "reference";
    return solve(p, inner);
  });
  const auto names = backend_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "counting"), names.end());
  const SocpSolution s = solve(abs_problem(), SolverOptions{1e-8, 200, "counting"});
  EXPECT_EQ(calls, 1);
  EXPECT_NEAR(s.x(0), 0.5, 1e-7);
}

TEST(Solve, ObjectiveScalingKeepsArgmin) {
  for (int k : {0, 2, 5}) {
    SocpProblem p = ccp3::testing::random_socp(6 + k, 3 + k, 3, 0, 500 + k);
    const SocpSolution a = solve(p, 1e-9);
    p.objective *= 10.0;
    const SocpSolution b = solve(p, 1e-9);
    ASSERT_EQ(a.status, SolveStatus::Optimal);
    ASSERT_EQ(b.status, SolveStatus::Optimal);
    EXPECT_LE((a.x - b.x).norm(), 1e-5 * (1 + a.x.norm()));
    EXPECT_NEAR(b.objective_value, 10.0 * a.objective_value, 1e-7 * (1 + std::abs(b.objective_value)));
  }
}

TEST(Residuals, InteriorAndPerturbedPoints) {
  const SocpProblem p = abs_problem();
  RealVec x(1);
  x << 2.0;
  EXPECT_EQ(residuals(p, x).cone_violation, 0.0);
  const SocpSolution s = solve(p, 1e-9);
  RealVec bad = s.x;
  bad(0) -= 0.1;
  EXPECT_GT(residuals(p, bad).cone_violation, 0.0);
  EXPECT_GT(p.cone_blocks[0].violation(bad), 0.0);
}

TEST(Solve, NonRobustMvdrMatchesClosedForm) {
  ArrayModel model;
  const ComplexMat R = interference_noise_cov(model);
  const ComplexVec a = ula_steering(model, model.signal_doa);
  const BeamformerResult cf = mvdr_closed_form(R, a);
  for (const auto& rc : regression_set()) {
    if (rc.name != "mvdr") continue;
    const SocpSolution s = solve(rc.problem, 1e-9);
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    const ComplexVec w = unstack(s.x.head(2 * model.M));
    EXPECT_LE((w - cf.w).cwiseAbs().maxCoeff(), 1e-6);
    const Residuals r = residuals(rc.problem, s);
    EXPECT_LE(std::max({r.primal, r.dual, r.gap}), 1e-9);
  }
}

TEST(StandardForm, ConeOrdering) {
  SocpProblem p(2);
  p.nonneg_indices = {1};
  RealVec c = RealVec::Ones(2);
  p.cone_blocks.push_back(ConeBlock::from_dense(RealMat::Identity(2, 2), RealVec::Zero(2), c, 1.0));
  p.cone_blocks.push_back(ConeBlock::linear(c, 2.0));
  const StandardForm sf = to_standard_form(p);
  EXPECT_EQ(sf.lp_dim, 2);
  ASSERT_EQ(sf.soc_dims.size(), 1u);
  EXPECT_EQ(sf.soc_dims[0], 3);
  EXPECT_EQ(sf.cone_dim(), 5);
}
