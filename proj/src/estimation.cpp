#include "ccp3/estimation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ccp3/io.hpp"

namespace ccp3 {

void SampleSet::validate() const {
  if (samples.empty()) throw std::invalid_argument("sample set is empty");
  const auto n = samples.front().size();
  if (n == 0) throw std::invalid_argument("samples have dimension 0");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != n)
      throw std::invalid_argument("sample " + std::to_string(i) + " has dimension " +
                                  std::to_string(samples[i].size()) + ", expected " + std::to_string(n));
    if (!samples[i].allFinite()) throw std::invalid_argument("sample " + std::to_string(i) + " is not finite");
  }
}

MomentTriple empirical_moments(const SampleSet& s) {
  s.validate();
  const auto n = s.dim();
  const auto N = static_cast<Eigen::Index>(s.size());
  ComplexMat X(n, N);
  for (Eigen::Index i = 0; i < N; ++i) X.col(i) = s.samples[static_cast<std::size_t>(i)];
  MomentTriple m;
  m.mean = X.rowwise().mean();
  X.colwise() -= m.mean;
  const double inv = 1.0 / static_cast<double>(N);
  const ComplexMat cov = X * X.adjoint() * inv;
  const ComplexMat pcov = X * X.transpose() * inv;
  m.cov = 0.5 * (cov + cov.adjoint());
  m.pcov = 0.5 * (pcov + pcov.transpose());
  return m;
}

MomentAccumulator::MomentAccumulator(Eigen::Index dim)
    : dim_(dim),
      shift_(ComplexVec::Zero(dim)),
      s1_(ComplexVec::Zero(dim)),
      s2_(ComplexMat::Zero(dim, dim)),
      s2t_(ComplexMat::Zero(dim, dim)) {
  if (dim <= 0) throw std::invalid_argument("MomentAccumulator: dimension must be positive");
}

void MomentAccumulator::add(const ComplexMat& columns) {
  if (columns.rows() != dim_) throw std::invalid_argument("MomentAccumulator: wrong sample dimension");
  if (columns.cols() == 0) return;
  if (count_ == 0) shift_ = columns.col(0);
  ComplexMat X = columns.colwise() - shift_;
  max_norm_ = std::max(max_norm_, columns.colwise().norm().maxCoeff());
  s1_ += X.rowwise().sum();
  s2_ += X * X.adjoint();
  s2t_ += X * X.transpose();
  count_ += columns.cols();
}

MomentTriple MomentAccumulator::moments() const {
  if (count_ == 0) throw std::invalid_argument("sample set is empty");
  const double inv = 1.0 / static_cast<double>(count_);
  const ComplexVec d = s1_ * inv;
  MomentTriple m;
  m.mean = shift_ + d;
  const ComplexMat cov = s2_ * inv - d * d.adjoint();
  const ComplexMat pcov = s2t_ * inv - d * d.transpose();
  m.cov = 0.5 * (cov + cov.adjoint());
  m.pcov = 0.5 * (pcov + pcov.transpose());
  return m;
}

ConcentrationRadii concentration_radii(double R, long long N, double delta) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("support radius R must be positive");
  if (N < 1) throw std::invalid_argument("sample count N must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence delta must lie in (0, 1)");
  const double factor = 2.0 + std::sqrt(2.0 * std::log(6.0 / delta));
  const double root_n = std::sqrt(static_cast<double>(N));
  ConcentrationRadii out;
  out.r1 = R / root_n * factor;
  out.r2 = 2.0 * R * R / root_n * factor;
  out.min_n = static_cast<long long>(std::ceil(factor * factor));
  out.below_min_n = N < out.min_n;
  return out;
}

double support_radius(const SampleSet& s) {
  s.validate();
  double r = 0.0;
  for (const auto& v : s.samples) r = std::max(r, v.norm());
  return r;
}

EstimatedMoments estimate_with_radii(const SampleSet& s, double delta, std::optional<double> R) {
  return attach_radii(empirical_moments(s), support_radius(s), static_cast<long long>(s.size()), delta, R);
}

EstimatedMoments attach_radii(MomentTriple triple, double sample_max_norm, long long N, double delta,
                              std::optional<double> R) {
  EstimatedMoments out;
  out.triple = std::move(triple);
  out.N = N;
  out.delta = delta;
  if (R) {
    out.R = *R;
  } else {
    out.R = sample_max_norm;
    out.support_estimated = true;
    out.warnings.push_back("estimated support: R taken as the largest sample norm, guarantee is heuristic");
  }
  const auto radii = concentration_radii(out.R, out.N, delta);
  out.r1 = radii.r1;
  out.r2 = radii.r2;
  out.below_min_n = radii.below_min_n;
  if (radii.below_min_n)
    out.warnings.push_back("N = " + std::to_string(out.N) + " is below the minimum " +
                           std::to_string(radii.min_n) + "; no guarantee");
  return out;
}

DataDrivenRow to_data_driven_row(const EstimatedMoments& est) { return {est.triple, est.r1, est.r2}; }

SampleSet read_samples(std::istream& in) {
  SampleSet s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> vals;
    const char* p = line.data() + first;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
      if (p >= end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw std::invalid_argument("sample line " + std::to_string(lineno) + ": bad number");
      vals.push_back(v);
      p = next;
    }
    if (vals.size() % 2 != 0)
      throw std::invalid_argument("sample line " + std::to_string(lineno) + ": odd number of values");
    ComplexVec v(static_cast<Eigen::Index>(vals.size() / 2));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(vals[2 * k], vals[2 * k + 1]);
    if (!s.samples.empty() && v.size() != s.samples.front().size())
      throw std::invalid_argument("sample line " + std::to_string(lineno) + ": inconsistent dimension");
    s.samples.push_back(std::move(v));
  }
  s.validate();
  return s;
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file " + path);
  return read_samples(in);
}

void write_samples(std::ostream& out, const SampleSet& s) {
  for (const auto& v : s.samples) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (k) out << ' ';
      out << format_double(v(k).real()) << ' ' << format_double(v(k).imag());
    }
    out << '\n';
  }
}

}  // namespace ccp3
