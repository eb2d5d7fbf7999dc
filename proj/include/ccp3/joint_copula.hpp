#pragma once

// Joint chance constraints through the Gumbel-Hougaard copula.
//
// A joint level p is split into per-row levels p_i = p^(y_i^(1/theta)) with
// weights y on the simplex. The row safety factor then becomes the convex
// function k_p(y) = k(p^(y^(1/theta))), which is bracketed by a max of
// tangents (lower approximation) or a max of chords (upper approximation).
// Substituting r_i >= (alpha_l + beta_l y_i) z, with w_i = y_i z, yields a
// single SOCP in (z, r, w).

#include <optional>
#include <vector>

#include "ccp3/ambiguity_reform.hpp"

namespace ccp3 {

struct CopulaParam {
  double theta = 1.0;
};

/// exp(-(sum (-ln u_i)^theta)^(1/theta)); u_i in (0, 1], theta >= 1.
double gumbel_copula(const std::vector<double>& u, CopulaParam theta);

/// Per-row levels p^(y_i^(1/theta)); y_i > 0 with sum 1 to 1e-12.
std::vector<double> decompose_joint(double p, const std::vector<double>& y, CopulaParam theta);

/// k_p(y) and its derivative for the model's row of the level table.
double kp_y(const AmbiguitySpec& spec, double p, CopulaParam theta, double y);
double kp_y_prime(const AmbiguitySpec& spec, double p, CopulaParam theta, double y);

struct Piece {
  double alpha = 0.0;
  double beta = 0.0;
  [[nodiscard]] double operator()(double y) const { return alpha + beta * y; }
};
using PieceCoeffs = std::vector<Piece>;

double max_of_pieces(const PieceCoeffs& pieces, double y);

/// Tangents at every point (a global minorant of k_p on (0, 1]).
PieceCoeffs tangent_underestimator(const AmbiguitySpec& spec, double p, CopulaParam theta,
                                   const std::vector<double>& points);
/// Chords between consecutive points (a majorant on [t_1, t_N]); needs N >= 2.
PieceCoeffs interp_overestimator(const AmbiguitySpec& spec, double p, CopulaParam theta,
                                 const std::vector<double>& points);

/// N points spaced geometrically from lo to 1.
std::vector<double> geometric_points(std::size_t count, double lo = 1e-3);

enum class BoundMode { Lower, Upper };

struct JointApproxConfig {
  CopulaParam theta;
  std::vector<double> points;
  BoundMode mode = BoundMode::Lower;
  /// Adds Re w_ij >= 0 and Im w_ij >= 0. Off by default.
  bool nonneg_weights = false;
};

/// Column offsets of the joint decision vector.
struct JointLayout {
  Eigen::Index n = 0;
  std::size_t m = 0;
  Eigen::Index nvars = 0;
  [[nodiscard]] Eigen::Index z_re() const { return 0; }
  [[nodiscard]] Eigen::Index z_im() const { return n; }
  [[nodiscard]] Eigen::Index r_re(std::size_t i) const { return 2 * n + static_cast<Eigen::Index>(i) * 2 * n; }
  [[nodiscard]] Eigen::Index r_im(std::size_t i) const { return r_re(i) + n; }
  [[nodiscard]] Eigen::Index w_re(std::size_t i) const {
    return 2 * n + static_cast<Eigen::Index>(m) * 2 * n + static_cast<Eigen::Index>(i) * 2 * n;
  }
  [[nodiscard]] Eigen::Index w_im(std::size_t i) const { return w_re(i) + n; }
};

struct JointSocp {
  SocpProblem socp;
  JointLayout layout;
  PieceCoeffs pieces;
};

/// Requires problem.sign_constraints and a deterministic objective; the
/// problem's per-row levels are ignored in favour of the joint level p.
JointSocp build_joint_socp(const Problem3CP& problem, const AmbiguitySpec& spec, double p,
                           const JointApproxConfig& config);

ComplexVec joint_decision(const JointSocp& js, const RealVec& x);

/// A posteriori check of an upper-approximation solution: implied weights
/// y_i = <w_i, z> / ||z||^2, and whether z satisfies every row at level
/// p^(y_i^(1/theta)).
struct UpperCertificate {
  std::vector<double> y;
  std::vector<std::size_t> active_piece;
  std::vector<double> row_slack;  // k_p(y_i) sigma_i + extra_i + mu_i (<= 0 means satisfied)
  double weight_sum = 0.0;
  bool holds = false;
};

UpperCertificate check_upper_certificate(const JointSocp& js, const Problem3CP& problem,
                                         const AmbiguitySpec& spec, double p, CopulaParam theta,
                                         const RealVec& x, double tol = 1e-7);

/// The individual problem with levels decompose_joint(p, y, theta).
Problem3CP with_joint_levels(const Problem3CP& problem, double p, const std::vector<double>& y,
                             CopulaParam theta);

}  // namespace ccp3
