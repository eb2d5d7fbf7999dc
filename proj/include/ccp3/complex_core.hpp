#pragma once

// Complex moment algebra.
//
// Every complex vector z = x + iy is stacked into reals as [x; y]. A complex
// random vector d with mean mu, covariance Gamma = E[(d-mu)(d-mu)^H] and
// pseudo-covariance J = E[(d-mu)(d-mu)^T] has the real augmented covariance
//
//   K = Cov([Re d; Im d]) = 1/2 [[Re(G+J), Im(J-G)], [Im(J+G), Re(G-J)]].
//
// Real affine functions of d reduce to quadratic forms in K:
//   Re(d^H z) has variance  [x;  y]^T K [x;  y]
//   Re(d^T z) has variance  [x; -y]^T K [x; -y]
// The second form is the one used for constraint rows Re(a z) - b.

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace ccp3 {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

/// Mean, covariance and pseudo-covariance of a complex random vector.
struct MomentTriple {
  ComplexVec mean;
  ComplexMat cov;
  ComplexMat pcov;

  [[nodiscard]] Eigen::Index dim() const { return mean.size(); }

  /// Degenerate triple (all mass at the mean).
  static MomentTriple point(const ComplexVec& mean);
  /// Proper (J = 0) triple.
  static MomentTriple proper(const ComplexVec& mean, const ComplexMat& cov);
};

/// One random constraint Re(a z) - b <= 0 with a, b independent.
struct ConstraintRow {
  MomentTriple a;
  double b_mean = 0.0;
  double b_var = 0.0;

  [[nodiscard]] Eigen::Index dim() const { return a.dim(); }

  /// Moments of the stacked row d = [a, b] (dimension n + 1); b is real, so
  /// its variance appears in both the covariance and the pseudo-covariance.
  [[nodiscard]] MomentTriple stacked() const;
};

struct AffineStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Result of validate_moment_triple; `ok()` when no invariant is violated.
struct MomentDiagnostic {
  std::optional<std::string> problem;
  [[nodiscard]] bool ok() const { return !problem.has_value(); }
};

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

/// Stack a complex vector as [Re z; Im z].
RealVec stack(const ComplexVec& z);
/// Inverse of stack().
ComplexVec unstack(const RealVec& w);
/// Stack conj(z): [Re z; -Im z].
RealVec stack_conj(const ComplexVec& z);

/// Real 2n x 2n covariance of [Re d; Im d]. Throws std::invalid_argument when
/// cov is not Hermitian or pcov is not symmetric.
RealMat augmented_covariance(const ComplexMat& cov, const ComplexMat& pcov);

/// Inverse map: (Gamma, J) from a real 2n x 2n covariance of [Re d; Im d].
std::pair<ComplexMat, ComplexMat> complex_moments_from_augmented(const RealMat& k);

/// Mean and variance of Re(c^H z) for random c.
AffineStats objective_stats(const MomentTriple& c, const ComplexVec& z);

/// Mean and variance of Re(a z) - b.
AffineStats constraint_stats(const ConstraintRow& row, const ComplexVec& z);

MomentDiagnostic validate_moment_triple(const MomentTriple& m);

/// Throwing wrapper around validate_moment_triple.
void require_valid(const MomentTriple& m, const std::string& what);

/// Factor F with F^T F = K for a symmetric PSD K. Rows belonging to
/// eigenvalues below 1e-14 * max eigenvalue are dropped, so F can be wide.
RealMat psd_factor(const RealMat& k);

/// Symmetric PSD square root of a symmetric PSD matrix.
RealMat psd_sqrt(const RealMat& k);

/// Hermitian PSD square root.
ComplexMat hermitian_sqrt(const ComplexMat& m);

/// Real 2n x 2n representation of a complex matrix acting on stacked vectors.
RealMat real_representation(const ComplexMat& m);

}  // namespace ccp3
