#include "ccp3/complex_core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ccp3 {

namespace {

double max_abs(const ComplexMat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Largest |m(i,j) - target(i,j)| and its position.
struct Worst {
  double err = 0.0;
  Eigen::Index i = 0;
  Eigen::Index j = 0;
};

template <typename F>
Worst worst_entry(Eigen::Index n, F&& diff) {
  Worst w;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double e = diff(i, j);
      if (e > w.err) w = {e, i, j};
    }
  return w;
}

std::string entry_name(const char* what, const Worst& w) {
  std::ostringstream os;
  os << what << "(" << w.i << "," << w.j << ") deviates by " << w.err;
  return os.str();
}

}  // namespace

MomentTriple MomentTriple::point(const ComplexVec& mean) {
  const auto n = mean.size();
  return {mean, ComplexMat::Zero(n, n), ComplexMat::Zero(n, n)};
}

MomentTriple MomentTriple::proper(const ComplexVec& mean, const ComplexMat& cov) {
  const auto n = mean.size();
  return {mean, cov, ComplexMat::Zero(n, n)};
}

MomentTriple ConstraintRow::stacked() const {
  const auto n = a.dim();
  MomentTriple d;
  d.mean.resize(n + 1);
  d.mean.head(n) = a.mean;
  d.mean(n) = b_mean;
  d.cov = ComplexMat::Zero(n + 1, n + 1);
  d.pcov = ComplexMat::Zero(n + 1, n + 1);
  d.cov.topLeftCorner(n, n) = a.cov;
  d.pcov.topLeftCorner(n, n) = a.pcov;
  d.cov(n, n) = b_var;
  d.pcov(n, n) = b_var;
  return d;
}

RealVec stack(const ComplexVec& z) {
  const auto n = z.size();
  RealVec w(2 * n);
  w.head(n) = z.real();
  w.tail(n) = z.imag();
  return w;
}

ComplexVec unstack(const RealVec& w) {
  if (w.size() % 2 != 0) throw std::invalid_argument("unstack: odd length");
  const auto n = w.size() / 2;
  ComplexVec z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = Complex(w(k), w(n + k));
  return z;
}

RealVec stack_conj(const ComplexVec& z) {
  const auto n = z.size();
  RealVec w(2 * n);
  w.head(n) = z.real();
  w.tail(n) = -z.imag();
  return w;
}

RealMat augmented_covariance(const ComplexMat& cov, const ComplexMat& pcov) {
  const auto n = cov.rows();
  if (cov.cols() != n || pcov.rows() != n || pcov.cols() != n)
    throw std::invalid_argument("augmented_covariance: dimension mismatch");
  const double scale = std::max(1.0, std::max(max_abs(cov), max_abs(pcov)));
  const auto herm = worst_entry(n, [&](auto i, auto j) {
    return std::abs(cov(i, j) - std::conj(cov(j, i)));
  });
  if (herm.err > kSymmetryTol * scale)
    throw std::invalid_argument("covariance not Hermitian: " + entry_name("cov", herm));
  const auto sym = worst_entry(n, [&](auto i, auto j) {
    return std::abs(pcov(i, j) - pcov(j, i));
  });
  if (sym.err > kSymmetryTol * scale)
    throw std::invalid_argument("pseudo-covariance not symmetric: " + entry_name("pcov", sym));

  RealMat k(2 * n, 2 * n);
  k.topLeftCorner(n, n) = 0.5 * (cov.real() + pcov.real());
  k.topRightCorner(n, n) = 0.5 * (pcov.imag() - cov.imag());
  k.bottomLeftCorner(n, n) = 0.5 * (pcov.imag() + cov.imag());
  k.bottomRightCorner(n, n) = 0.5 * (cov.real() - pcov.real());
  return 0.5 * (k + k.transpose());
}

std::pair<ComplexMat, ComplexMat> complex_moments_from_augmented(const RealMat& k) {
  if (k.rows() != k.cols() || k.rows() % 2 != 0)
    throw std::invalid_argument("augmented matrix must be square with even size");
  const auto n = k.rows() / 2;
  const RealMat xx = k.topLeftCorner(n, n);
  const RealMat xy = k.topRightCorner(n, n);
  const RealMat yx = k.bottomLeftCorner(n, n);
  const RealMat yy = k.bottomRightCorner(n, n);
  ComplexMat cov(n, n), pcov(n, n);
  cov.real() = xx + yy;
  cov.imag() = yx - xy;
  pcov.real() = xx - yy;
  pcov.imag() = yx + xy;
  return {cov, pcov};
}

AffineStats objective_stats(const MomentTriple& c, const ComplexVec& z) {
  if (c.dim() != z.size()) throw std::invalid_argument("objective_stats: dimension mismatch");
  const RealMat k = augmented_covariance(c.cov, c.pcov);
  const RealVec w = stack(z);
  return {c.mean.dot(z).real(), std::max(0.0, w.dot(k * w))};
}

AffineStats constraint_stats(const ConstraintRow& row, const ComplexVec& z) {
  if (row.dim() != z.size()) throw std::invalid_argument("constraint_stats: dimension mismatch");
  if (row.b_var < 0.0) throw std::invalid_argument("constraint_stats: negative b variance");
  const RealMat k = augmented_covariance(row.a.cov, row.a.pcov);
  const RealVec w = stack_conj(z);
  const double mean = (row.a.mean.transpose() * z).value().real() - row.b_mean;
  return {mean, std::max(0.0, w.dot(k * w)) + row.b_var};
}

MomentDiagnostic validate_moment_triple(const MomentTriple& m) {
  const auto n = m.dim();
  if (n == 0) return {"mean has length 0"};
  if (m.cov.rows() != n || m.cov.cols() != n)
    return {"cov is not " + std::to_string(n) + "x" + std::to_string(n)};
  if (m.pcov.rows() != n || m.pcov.cols() != n)
    return {"pcov is not " + std::to_string(n) + "x" + std::to_string(n)};
  if (!m.mean.allFinite() || !m.cov.allFinite() || !m.pcov.allFinite())
    return {"non-finite entry"};

  const double scale = std::max(1.0, std::max(max_abs(m.cov), max_abs(m.pcov)));
  const auto herm = worst_entry(n, [&](auto i, auto j) {
    return std::abs(m.cov(i, j) - std::conj(m.cov(j, i)));
  });
  if (herm.err > kSymmetryTol * scale)
    return {"cov not Hermitian: " + entry_name("cov", herm)};
  const auto sym = worst_entry(n, [&](auto i, auto j) {
    return std::abs(m.pcov(i, j) - m.pcov(j, i));
  });
  if (sym.err > kSymmetryTol * scale)
    return {"pcov not symmetric: " + entry_name("pcov", sym)};

  const RealMat k = augmented_covariance(m.cov, m.pcov);
  Eigen::SelfAdjointEigenSolver<RealMat> es(k, Eigen::EigenvaluesOnly);
  const RealVec& ev = es.eigenvalues();
  const double spectral = ev.cwiseAbs().maxCoeff();
  if (ev(0) < -kPsdTol * spectral) {
    std::ostringstream os;
    os << "augmented covariance indefinite: min eigenvalue " << ev(0)
       << " (max |eigenvalue| " << spectral << ")";
    return {os.str()};
  }
  return {};
}

void require_valid(const MomentTriple& m, const std::string& what) {
  const auto diag = validate_moment_triple(m);
  if (!diag.ok()) throw std::invalid_argument(what + ": " + *diag.problem);
}

RealMat psd_factor(const RealMat& k) {
  Eigen::SelfAdjointEigenSolver<RealMat> es(0.5 * (k + k.transpose()));
  const RealVec& ev = es.eigenvalues();
  const double top = ev.size() ? std::max(0.0, ev.maxCoeff()) : 0.0;
  const double cut = 1e-14 * top;
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cut && top > 0.0) ++keep;
  RealMat f(keep, k.cols());
  Eigen::Index row = 0;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
    if (!(ev(i) > cut && top > 0.0)) continue;
    f.row(row++) = std::sqrt(ev(i)) * es.eigenvectors().col(i).transpose();
  }
  return f;
}

RealMat psd_sqrt(const RealMat& k) {
  Eigen::SelfAdjointEigenSolver<RealMat> es(0.5 * (k + k.transpose()));
  const RealVec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

ComplexMat hermitian_sqrt(const ComplexMat& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMat> es(0.5 * (m + m.adjoint()));
  const RealVec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

RealMat real_representation(const ComplexMat& m) {
  const auto r = m.rows(), c = m.cols();
  RealMat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

}  // namespace ccp3
