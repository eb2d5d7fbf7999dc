#pragma once

// Named complex elliptically symmetric families: standardized univariate
// marginals (quantile / CDF / density) and seeded samplers that reproduce a
// given MomentTriple.
//
// Every family is normalized to unit variance before it is mixed, so the
// safety factor of the quantile reformulation multiplies the true standard
// deviation. Families without a variance (Student-t with nu <= 2, Cauchy) use
// the unit-scale law instead and the MomentTriple is read as a scatter.

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "ccp3/complex_core.hpp"

namespace ccp3 {

struct Gaussian {};
struct StudentT {
  double nu = 4.0;
};
struct Laplace {};
struct Logistic {};
struct Cauchy {};
struct GeneralizedGaussian {
  double s = 1.0;
  double b = 1.0;
};

using CesFamily = std::variant<Gaussian, StudentT, Laplace, Logistic, Cauchy, GeneralizedGaussian>;

/// Cauchy is Student-t with one degree of freedom; every other family is
/// returned unchanged. Parameters are validated (throws on nu, s, b <= 0).
CesFamily canonical(const CesFamily& family);

std::string family_name(const CesFamily& family);

/// False for the laws whose MomentTriple is a scatter rather than a covariance.
bool has_finite_variance(const CesFamily& family);

/// Inverse CDF of the standardized univariate marginal; p in (0, 1).
double marginal_quantile(const CesFamily& family, double p);
double marginal_cdf(const CesFamily& family, double x);
double marginal_pdf(const CesFamily& family, double x);

// Univariate building blocks, exposed for tests and the copula tables.
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);
double kolmogorov_cdf(double x);

/// Explicit random stream. Distinct workers must use distinct stream indices.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  [[nodiscard]] std::mt19937_64 engine() const;
  [[nodiscard]] SeededStream substream(std::uint64_t index) const;
};

/// Precomputed sampler X = mu + L xi, with L the symmetric square root of the
/// augmented covariance and xi a standardized 2n-dimensional draw.
class CesSampler {
 public:
  CesSampler(CesFamily family, MomentTriple moments);

  /// count draws as the columns of an n x count matrix.
  [[nodiscard]] ComplexMat draw(Eigen::Index count, std::mt19937_64& rng) const;
  /// Standardized real draws (2n x count) before the affine map.
  [[nodiscard]] RealMat draw_standard(Eigen::Index count, std::mt19937_64& rng) const;

  [[nodiscard]] const CesFamily& family() const { return family_; }
  [[nodiscard]] const MomentTriple& moments() const { return moments_; }

 private:
  CesFamily family_;
  MomentTriple moments_;
  RealMat root_;
  RealVec mean_stacked_;
};

std::vector<ComplexVec> sample_complex(const CesFamily& family, const MomentTriple& m,
                                       long long count, const SeededStream& rng);

}  // namespace ccp3
