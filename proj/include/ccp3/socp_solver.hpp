#pragma once

// Second-order cone programs and a primal-dual interior-point solver.
//
// A problem is
//   minimize    objective^T x
//   subject to  ||A_k x + b_k|| <= c_k^T x + d_k     (cone blocks)
//               E x = f                             (equalities)
//               C x <= g                            (linear inequalities)
//               x_i >= 0 for i in nonneg_indices
//
// Internally it is rewritten in the standard form
//   minimize c^T x  s.t.  A x = b,  G x + s = h,  s in K
// with K a product of a nonnegative orthant and Lorentz cones, ordered as
// [nonneg][linear rows][zero-row cone blocks][Lorentz blocks]. Duals in
// SocpSolution follow that ordering.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "ccp3/complex_core.hpp"

namespace ccp3 {

using SparseMat = Eigen::SparseMatrix<double>;
using SparseVec = Eigen::SparseVector<double>;

/// ||A x + b|| <= c^T x + d. A block with zero rows is the linear
/// inequality c^T x + d >= 0.
struct ConeBlock {
  SparseMat A;
  RealVec b;
  SparseVec c;
  double d = 0.0;

  [[nodiscard]] Eigen::Index rows() const { return A.rows(); }

  static ConeBlock from_dense(const RealMat& A, const RealVec& b, const RealVec& c, double d);
  /// c^T x + d >= 0
  static ConeBlock linear(const RealVec& c, double d);

  /// max(0, ||A x + b|| - (c^T x + d)).
  [[nodiscard]] double violation(const RealVec& x) const;
};

struct SocpProblem {
  Eigen::Index nvars = 0;
  RealVec objective;
  std::vector<ConeBlock> cone_blocks;
  SparseMat eq_matrix;
  RealVec eq_rhs;
  SparseMat ineq_matrix;
  RealVec ineq_rhs;
  std::vector<Eigen::Index> nonneg_indices;

  explicit SocpProblem(Eigen::Index n = 0);

  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;

  void add_equality(const std::vector<Eigen::Triplet<double>>& row_entries, double rhs);
  void add_equalities(const SparseMat& E, const RealVec& f);
  void add_inequalities(const SparseMat& C, const RealVec& g);
};

/// min c^T x, A x = b, G x + s = h, s in R+^lp_dim x Q^{soc_dims[0]} x ...
struct StandardForm {
  RealVec c;
  SparseMat A;
  RealVec b;
  SparseMat G;
  RealVec h;
  Eigen::Index lp_dim = 0;
  std::vector<Eigen::Index> soc_dims;

  [[nodiscard]] Eigen::Index cone_dim() const { return G.rows(); }
};

StandardForm to_standard_form(const SocpProblem& p);

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

std::string to_string(SolveStatus s);

struct SocpSolution {
  SolveStatus status = SolveStatus::MaxIter;
  RealVec x;
  RealVec y;  // equality multipliers
  RealVec z;  // cone multipliers, standard-form order
  RealVec s;  // cone slacks, standard-form order
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

struct Residuals {
  double primal = 0.0;          // max of equality residual and cone violation (relative)
  double dual = 0.0;            // stationarity residual plus dual cone violation (relative)
  double gap = 0.0;             // |pcost - dcost| / max(1, min(|pcost|, |dcost|))
  double cone_violation = 0.0;  // absolute, over h - G x
  double pcost = 0.0;
  double dcost = 0.0;
};

/// Re-evaluates a candidate on the unscaled problem. This is the same
/// function the solver uses to declare optimality.
Residuals residuals(const SocpProblem& p, const SocpSolution& sol);
Residuals residuals(const StandardForm& sf, const RealVec& x, const RealVec& y, const RealVec& z);
/// Primal-only evaluation (dual and gap are left at zero).
Residuals residuals(const SocpProblem& p, const RealVec& x);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  std::string backend = "reference";
};

using SolverBackend = std::function<SocpSolution(const SocpProblem&, const SolverOptions&)>;

/// Dispatch to the backend named in opts. Throws std::invalid_argument on an
/// unknown backend or a tolerance outside [1e-12, 1e-3].
SocpSolution solve(const SocpProblem& p, const SolverOptions& opts = {});
SocpSolution solve(const SocpProblem& p, double tol);

/// Built-ins: "reference" (sparse LDL^T on the quasi-definite KKT system) and
/// "dense" (dense LU on the same system; small problems only).
void register_backend(const std::string& name, SolverBackend backend);
std::vector<std::string> backend_names();

}  // namespace ccp3
