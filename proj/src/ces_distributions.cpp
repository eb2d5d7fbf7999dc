#include "ccp3/ces_distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ccp3 {

namespace {

constexpr double kPi = std::numbers::pi;

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0, 1)");
}

// Unit-variance multiplier for Student-t, or 1 when the variance is infinite.
double t_scale(double nu) { return nu > 2.0 ? std::sqrt((nu - 2.0) / nu) : 1.0; }

constexpr double kLaplaceScale = 0.70710678118654752440;  // 1/sqrt(2)
const double kLogisticScale = std::sqrt(3.0) / kPi;

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double student_t_pdf(double x, double nu) {
  const double log_norm =
      std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * kPi);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double laplace_quantile(double p) {
  return p < 0.5 ? kLaplaceScale * std::log(2.0 * p) : -kLaplaceScale * std::log(2.0 * (1.0 - p));
}

double kolmogorov_quantile(double u) {
  double lo = 0.05, hi = 6.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Radial multiplier s so that s * N(0, I) has the family's standardized law.
struct RadialDraw {
  template <typename Rng>
  double operator()(const Gaussian&, Rng&) const {
    return 1.0;
  }
  template <typename Rng>
  double operator()(const StudentT& t, Rng& rng) const {
    std::chi_squared_distribution<double> chi2(t.nu);
    const double num = t.nu > 2.0 ? t.nu - 2.0 : t.nu;
    return std::sqrt(num / chi2(rng));
  }
  template <typename Rng>
  double operator()(const Laplace&, Rng& rng) const {
    std::exponential_distribution<double> expo(1.0);
    return std::sqrt(expo(rng));
  }
  template <typename Rng>
  double operator()(const Logistic&, Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return 2.0 * kolmogorov_quantile(unif(rng)) * kLogisticScale;
  }
  template <typename Rng>
  double operator()(const Cauchy&, Rng& rng) const {
    return (*this)(StudentT{1.0}, rng);
  }
  template <typename Rng>
  double operator()(const GeneralizedGaussian&, Rng&) const {
    return 1.0;  // handled separately
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

CesFamily canonical(const CesFamily& family) {
  return std::visit(
      [](const auto& f) -> CesFamily {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          return StudentT{1.0};
        } else if constexpr (std::is_same_v<T, StudentT>) {
          if (!(f.nu > 0.0)) throw std::invalid_argument("Student-t requires nu > 0");
          return f;
        } else if constexpr (std::is_same_v<T, GeneralizedGaussian>) {
          if (!(f.s > 0.0) || !(f.b > 0.0))
            throw std::invalid_argument("generalized Gaussian requires s > 0 and b > 0");
          return f;
        } else {
          return f;
        }
      },
      family);
}

std::string family_name(const CesFamily& family) {
  struct Namer {
    std::string operator()(const Gaussian&) const { return "gaussian"; }
    std::string operator()(const StudentT& t) const {
      std::string nu = std::to_string(t.nu);
      nu.erase(nu.find_last_not_of('0') + 1);
      if (!nu.empty() && nu.back() == '.') nu.pop_back();
      return "student_t(" + nu + ")";
    }
    std::string operator()(const Laplace&) const { return "laplace"; }
    std::string operator()(const Logistic&) const { return "logistic"; }
    std::string operator()(const Cauchy&) const { return "cauchy"; }
    std::string operator()(const GeneralizedGaussian&) const { return "generalized_gaussian"; }
  };
  return std::visit(Namer{}, family);
}

bool has_finite_variance(const CesFamily& family) {
  const auto c = canonical(family);
  if (const auto* t = std::get_if<StudentT>(&c)) return t->nu > 2.0;
  return true;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double normal_quantile(double p) {
  check_probability(p);
  // Rational approximation (relative error ~1e-9) refined by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the erfc-based CDF, on the smaller tail.
  for (int it = 0; it < 2; ++it) {
    const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("student_t_cdf: nu must be positive");
  if (x == 0.0) return 0.5;
  if (nu == 1.0) return 0.5 + std::atan(x) / kPi;
  const double z = nu / (nu + x * x);
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, z);
  return x > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double nu) {
  check_probability(p);
  if (!(nu > 0.0)) throw std::invalid_argument("student_t_quantile: nu must be positive");
  if (nu == 1.0) return std::tan(kPi * (p - 0.5));
  if (nu == 2.0) return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, nu);
  // Bracket, bisect, then polish with safeguarded Newton steps.
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, nu) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, nu) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 50; ++i) {
    // Upper-tail residual keeps precision near p -> 1.
    const double resid = (1.0 - p) - student_t_cdf(-x, nu);
    const double step = resid / student_t_pdf(x, nu);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (resid > 0.0) hi = x; else lo = x;
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) {
    const double f = -kPi * kPi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double term = std::exp(f * (2 * k - 1) * (2 * k - 1));
      sum += term;
      if (term < 1e-18) break;
    }
    return std::sqrt(2.0 * kPi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? term : -term);
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

double marginal_quantile(const CesFamily& family, double p) {
  check_probability(p);
  struct Q {
    double p;
    double operator()(const Gaussian&) const { return normal_quantile(p); }
    double operator()(const StudentT& t) const { return t_scale(t.nu) * student_t_quantile(p, t.nu); }
    double operator()(const Laplace&) const { return laplace_quantile(p); }
    double operator()(const Logistic&) const { return kLogisticScale * std::log(p / (1.0 - p)); }
    double operator()(const Cauchy&) const { return student_t_quantile(p, 1.0); }
    double operator()(const GeneralizedGaussian& g) const {
      if (g.s == 1.0) return normal_quantile(p);
      if (g.s == 0.5) return laplace_quantile(p);
      throw std::invalid_argument("generalized Gaussian quantile only available for s = 1 or s = 1/2");
    }
  };
  return std::visit(Q{p}, canonical(family));
}

double marginal_cdf(const CesFamily& family, double x) {
  struct F {
    double x;
    double operator()(const Gaussian&) const { return normal_cdf(x); }
    double operator()(const StudentT& t) const { return student_t_cdf(x / t_scale(t.nu), t.nu); }
    double operator()(const Laplace&) const {
      return x < 0.0 ? 0.5 * std::exp(x / kLaplaceScale) : 1.0 - 0.5 * std::exp(-x / kLaplaceScale);
    }
    double operator()(const Logistic&) const { return 1.0 / (1.0 + std::exp(-x / kLogisticScale)); }
    double operator()(const Cauchy&) const { return student_t_cdf(x, 1.0); }
    double operator()(const GeneralizedGaussian& g) const {
      if (g.s == 1.0) return (*this)(Gaussian{});
      if (g.s == 0.5) return (*this)(Laplace{});
      throw std::invalid_argument("generalized Gaussian CDF only available for s = 1 or s = 1/2");
    }
  };
  return std::visit(F{x}, canonical(family));
}

double marginal_pdf(const CesFamily& family, double x) {
  struct D {
    double x;
    double operator()(const Gaussian&) const { return normal_pdf(x); }
    double operator()(const StudentT& t) const {
      const double c = t_scale(t.nu);
      return student_t_pdf(x / c, t.nu) / c;
    }
    double operator()(const Laplace&) const {
      return std::exp(-std::abs(x) / kLaplaceScale) / (2.0 * kLaplaceScale);
    }
    double operator()(const Logistic&) const {
      const double e = std::exp(-std::abs(x) / kLogisticScale);
      return e / (kLogisticScale * (1.0 + e) * (1.0 + e));
    }
    double operator()(const Cauchy&) const { return student_t_pdf(x, 1.0); }
    double operator()(const GeneralizedGaussian& g) const {
      if (g.s == 1.0) return (*this)(Gaussian{});
      if (g.s == 0.5) return (*this)(Laplace{});
      throw std::invalid_argument("generalized Gaussian density only available for s = 1 or s = 1/2");
    }
  };
  return std::visit(D{x}, canonical(family));
}

std::mt19937_64 SeededStream::engine() const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x3c6ef372u};
  return std::mt19937_64(seq);
}

SeededStream SeededStream::substream(std::uint64_t index) const {
  return {splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)), index};
}

CesSampler::CesSampler(CesFamily family, MomentTriple moments)
    : family_(canonical(family)), moments_(std::move(moments)) {
  require_valid(moments_, "sampler moments");
  root_ = psd_sqrt(augmented_covariance(moments_.cov, moments_.pcov));
  mean_stacked_ = stack(moments_.mean);
}

RealMat CesSampler::draw_standard(Eigen::Index count, std::mt19937_64& rng) const {
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
  const Eigen::Index d = 2 * moments_.dim();
  RealMat xi(d, count);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (const auto* gg = std::get_if<GeneralizedGaussian>(&family_)) {
    // Radial law of the real d-dimensional generator exp(-t^s): t^s ~ Gamma(d/(2s)).
    const double shape = d / (2.0 * gg->s);
    std::gamma_distribution<double> gamma(shape, 1.0);
    const double mean_t = std::exp(std::lgamma((d + 2.0) / (2.0 * gg->s)) - std::lgamma(shape));
    const double standardize = std::sqrt(d / mean_t);
    for (Eigen::Index col = 0; col < count; ++col) {
      const double radius = std::sqrt(std::pow(gamma(rng), 1.0 / gg->s));
      for (Eigen::Index i = 0; i < d; ++i) xi(i, col) = normal(rng);
      const double norm = xi.col(col).norm();
      xi.col(col) *= (norm > 0.0 ? standardize * radius / norm : 0.0);
    }
    return xi;
  }
  for (Eigen::Index col = 0; col < count; ++col) {
    const double s = std::visit([&](const auto& f) { return RadialDraw{}(f, rng); }, family_);
    for (Eigen::Index i = 0; i < d; ++i) xi(i, col) = s * normal(rng);
  }
  return xi;
}

ComplexMat CesSampler::draw(Eigen::Index count, std::mt19937_64& rng) const {
  const Eigen::Index n = moments_.dim();
  RealMat x = root_ * draw_standard(count, rng);
  x.colwise() += mean_stacked_;
  ComplexMat out(n, count);
  out.real() = x.topRows(n);
  out.imag() = x.bottomRows(n);
  return out;
}

std::vector<ComplexVec> sample_complex(const CesFamily& family, const MomentTriple& m,
                                       long long count, const SeededStream& rng) {
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
  CesSampler sampler(family, m);
  auto engine = rng.engine();
  const ComplexMat draws = sampler.draw(count, engine);
  std::vector<ComplexVec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index c = 0; c < draws.cols(); ++c) out.emplace_back(draws.col(c));
  return out;
}

}  // namespace ccp3
