#pragma once

// Deterministic second-order cone counterparts of individual complex chance
// constraints
//
//   P[ Re(a_i z) - b_i <= 0 ] >= p_i
//
// under seven uncertainty models, and assembly of the full SOCP.
//
// Rows are handled at the level of d = [a, b] and z~ = [z; -1], so that
// Re(a z) - b = Re(d z~). With w = [Re z~; -Im z~] (the stacking of conj z~),
// the mean is stack(mu_d)^T w and the variance is w^T K_d w.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccp3/ces_distributions.hpp"
#include "ccp3/complex_core.hpp"
#include "ccp3/socp_solver.hpp"

namespace ccp3 {

struct CesKnown {
  CesFamily family = Gaussian{};
};
struct MomentExact {};
struct MomentSymmetric {};
/// Upper bounds on the augmented covariance of each row d (2(n+1) square,
/// stacking [Re d; Im d]). A single entry applies to every row.
struct CovBounded {
  std::vector<RealMat> bounds;
};
/// Mean known only up to the ellipsoid (mu - mu^)^H G^-1 (mu - mu^) <= zeta.
/// Nominal triples are per row at the d level (n+1); empty means "use the
/// rows' own moments".
struct MomentsEllipsoid {
  double zeta = 0.0;
  std::vector<MomentTriple> nominal;
};
/// |d_k| <= l_k componentwise, k = 1..n+1.
struct NormSupport {
  RealVec l;
};
struct DataDrivenRow {
  MomentTriple est;  // d level, dimension n+1
  double r1 = 0.0;
  double r2 = 0.0;
};
struct DataDriven {
  std::vector<DataDrivenRow> rows;
};

using AmbiguitySpec = std::variant<CesKnown, MomentExact, MomentSymmetric, CovBounded,
                                   MomentsEllipsoid, NormSupport, DataDriven>;

std::string spec_name(const AmbiguitySpec& spec);
/// "exact", "distributionally robust", "conservative (sufficient condition)"
/// or "heuristic (infinite variance)".
std::string spec_semantics(const AmbiguitySpec& spec);

/// Lower end of the admissible level range; the range is [lo, 1) when
/// closed_low, else (lo, 1).
struct LevelRange {
  double lo = 0.0;
  bool closed_low = false;
  [[nodiscard]] bool contains(double p) const { return (closed_low ? p >= lo : p > lo) && p < 1.0; }
};
LevelRange level_range(const AmbiguitySpec& spec);

double safety_factor(const AmbiguitySpec& spec, double p);
/// d k / d p.
double safety_factor_derivative(const AmbiguitySpec& spec, double p);

struct Problem3CP {
  Eigen::Index n = 0;
  ComplexVec c;  // deterministic objective Re(c^H z)
  std::optional<MomentTriple> random_objective;
  double p0 = 0.5;
  std::vector<ConstraintRow> rows;
  std::vector<double> levels;
  bool sign_constraints = false;

  [[nodiscard]] std::size_t m() const { return rows.size(); }
  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const;
};

/// One row reduced to
///   k ||F w|| + ||H w|| + mean^T w <= 0,   w = [Re z~; -Im z~].
/// H is empty except for the ellipsoid and data-driven models.
struct RowCounterpart {
  double k = 0.0;
  RealVec mean;
  RealMat F;
  RealMat H;
};

RowCounterpart row_counterpart(const AmbiguitySpec& spec, const ConstraintRow& row,
                               std::size_t row_index, double p);

/// x -> M x + offset.
struct AffineMap {
  SparseMat M;
  RealVec offset;
};

/// w = [Re v; -1; -Im v; 0] where Re v and Im v occupy decision columns
/// [re_col, re_col + n) and [im_col, im_col + n).
AffineMap row_argument(Eigen::Index nvars, Eigen::Index re_col, Eigen::Index im_col, Eigen::Index n);

/// ||F (M x + o)|| <= c^T x + d
ConeBlock cone_from_map(const RealMat& F, const AffineMap& arg, const SparseVec& c, double d);

/// Blocks for one row over the variables [Re z; Im z] plus one auxiliary
/// variable at aux_col when the counterpart has an H term.
std::vector<ConeBlock> counterpart_blocks(const RowCounterpart& rc, Eigen::Index nvars,
                                          Eigen::Index n, std::optional<Eigen::Index> aux_col);

struct ConstraintReformulation {
  Eigen::Index nvars = 0;  // 2n, or 2n + 1 with the auxiliary variable
  std::vector<ConeBlock> blocks;
};

ConstraintReformulation reformulate_constraint(const AmbiguitySpec& spec, const ConstraintRow& row,
                                               double p, Eigen::Index n, std::size_t row_index = 0);

/// Decision layout: [Re z (n); Im z (n); t (random objective only); aux...].
SocpProblem reformulate_problem(const Problem3CP& problem, const AmbiguitySpec& spec);

/// Complex decision from a solution vector of reformulate_problem.
ComplexVec decision_from(const RealVec& x, Eigen::Index n);

/// Checks the model parameters against the problem; throws std::invalid_argument.
void validate_spec(const AmbiguitySpec& spec, const Problem3CP& problem);

}  // namespace ccp3
