#include "ccp3/socp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace ccp3 {

using Index = Eigen::Index;
using Triplet = Eigen::Triplet<double>;

ConeBlock ConeBlock::from_dense(const RealMat& A, const RealVec& b, const RealVec& c, double d) {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw std::invalid_argument("ConeBlock::from_dense: dimension mismatch");
  ConeBlock blk;
  blk.A = A.sparseView();
  blk.b = b;
  blk.c = c.sparseView();
  blk.d = d;
  return blk;
}

ConeBlock ConeBlock::linear(const RealVec& c, double d) {
  ConeBlock blk;
  blk.A.resize(0, c.size());
  blk.b.resize(0);
  blk.c = c.sparseView();
  blk.d = d;
  return blk;
}

double ConeBlock::violation(const RealVec& x) const {
  const double rhs = c.dot(x) + d;
  const double lhs = A.rows() ? (A * x + b).norm() : 0.0;
  return std::max(0.0, lhs - rhs);
}

SocpProblem::SocpProblem(Index n) : nvars(n), objective(RealVec::Zero(n)) {
  eq_matrix.resize(0, n);
  eq_rhs.resize(0);
  ineq_matrix.resize(0, n);
  ineq_rhs.resize(0);
}

void SocpProblem::validate() const {
  if (nvars <= 0) throw std::invalid_argument("SOCP needs at least one variable");
  if (objective.size() != nvars) throw std::invalid_argument("objective length != nvars");
  for (std::size_t k = 0; k < cone_blocks.size(); ++k) {
    const auto& blk = cone_blocks[k];
    if (blk.A.cols() != nvars || blk.c.size() != nvars || blk.b.size() != blk.A.rows())
      throw std::invalid_argument("cone block " + std::to_string(k) + " has inconsistent dimensions");
  }
  if (eq_matrix.cols() != nvars || eq_matrix.rows() != eq_rhs.size())
    throw std::invalid_argument("equality constraints have inconsistent dimensions");
  if (ineq_matrix.cols() != nvars || ineq_matrix.rows() != ineq_rhs.size())
    throw std::invalid_argument("linear inequalities have inconsistent dimensions");
  for (Index i : nonneg_indices)
    if (i < 0 || i >= nvars) throw std::invalid_argument("nonneg index out of range");
}

namespace {

SparseMat append_rows(const SparseMat& top, const SparseMat& bottom) {
  SparseMat out(top.rows() + bottom.rows(), top.cols());
  std::vector<Triplet> t;
  t.reserve(top.nonZeros() + bottom.nonZeros());
  for (Index k = 0; k < top.outerSize(); ++k)
    for (SparseMat::InnerIterator it(top, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < bottom.outerSize(); ++k)
    for (SparseMat::InnerIterator it(bottom, k); it; ++it)
      t.emplace_back(top.rows() + it.row(), it.col(), it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

RealVec append(const RealVec& a, const RealVec& b) {
  RealVec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

void SocpProblem::add_equality(const std::vector<Triplet>& row_entries, double rhs) {
  SparseMat row(1, nvars);
  std::vector<Triplet> t;
  for (const auto& e : row_entries) t.emplace_back(0, e.col(), e.value());
  row.setFromTriplets(t.begin(), t.end());
  add_equalities(row, RealVec::Constant(1, rhs));
}

void SocpProblem::add_equalities(const SparseMat& E, const RealVec& f) {
  if (E.cols() != nvars || E.rows() != f.size())
    throw std::invalid_argument("add_equalities: dimension mismatch");
  eq_matrix = append_rows(eq_matrix, E);
  eq_rhs = append(eq_rhs, f);
}

void SocpProblem::add_inequalities(const SparseMat& C, const RealVec& g) {
  if (C.cols() != nvars || C.rows() != g.size())
    throw std::invalid_argument("add_inequalities: dimension mismatch");
  ineq_matrix = append_rows(ineq_matrix, C);
  ineq_rhs = append(ineq_rhs, g);
}

StandardForm to_standard_form(const SocpProblem& p) {
  p.validate();
  StandardForm sf;
  sf.c = p.objective;
  sf.A = p.eq_matrix;
  sf.b = p.eq_rhs;

  std::vector<Triplet> t;
  std::vector<double> h;
  Index row = 0;
  for (Index i : p.nonneg_indices) {
    t.emplace_back(row++, i, -1.0);
    h.push_back(0.0);
  }
  const SparseMat& C = p.ineq_matrix;
  for (Index k = 0; k < C.outerSize(); ++k)
    for (SparseMat::InnerIterator it(C, k); it; ++it) t.emplace_back(row + it.row(), it.col(), it.value());
  for (Index i = 0; i < C.rows(); ++i) h.push_back(p.ineq_rhs(i));
  row += C.rows();
  for (const auto& blk : p.cone_blocks) {
    if (blk.rows() != 0) continue;
    for (SparseVec::InnerIterator it(blk.c); it; ++it) t.emplace_back(row, it.index(), -it.value());
    h.push_back(blk.d);
    ++row;
  }
  sf.lp_dim = row;
  for (const auto& blk : p.cone_blocks) {
    if (blk.rows() == 0) continue;
    for (SparseVec::InnerIterator it(blk.c); it; ++it) t.emplace_back(row, it.index(), -it.value());
    h.push_back(blk.d);
    for (Index k = 0; k < blk.A.outerSize(); ++k)
      for (SparseMat::InnerIterator it(blk.A, k); it; ++it)
        t.emplace_back(row + 1 + it.row(), it.col(), -it.value());
    for (Index i = 0; i < blk.rows(); ++i) h.push_back(blk.b(i));
    sf.soc_dims.push_back(blk.rows() + 1);
    row += blk.rows() + 1;
  }
  sf.G.resize(row, p.nvars);
  sf.G.setFromTriplets(t.begin(), t.end());
  sf.h = Eigen::Map<RealVec>(h.data(), static_cast<Index>(h.size()));
  return sf;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

namespace {

double inf_norm(const RealVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Distance outside the cone: LP entries below zero, Lorentz blocks with
// ||v1|| > v0.
double cone_violation(const RealVec& v, Index lp_dim, const std::vector<Index>& soc) {
  double worst = 0.0;
  for (Index i = 0; i < lp_dim; ++i) worst = std::max(worst, -v(i));
  Index off = lp_dim;
  for (Index q : soc) {
    worst = std::max(worst, v.segment(off + 1, q - 1).norm() - v(off));
    off += q;
  }
  return worst;
}

}  // namespace

Residuals residuals(const StandardForm& sf, const RealVec& x, const RealVec& y, const RealVec& z) {
  if (x.size() != sf.c.size() || y.size() != sf.b.size() || z.size() != sf.h.size())
    throw std::invalid_argument("residuals: dimension mismatch");
  Residuals r;
  const RealVec slack = sf.h - sf.G * x;
  r.cone_violation = cone_violation(slack, sf.lp_dim, sf.soc_dims);
  const double eq = sf.b.size() ? inf_norm(sf.A * x - sf.b) / (1.0 + inf_norm(sf.b)) : 0.0;
  r.primal = std::max(eq, r.cone_violation / (1.0 + inf_norm(sf.h)));

  const double cscale = 1.0 + inf_norm(sf.c);
  RealVec stat = sf.c;
  if (sf.b.size()) stat += sf.A.transpose() * y;
  if (sf.h.size()) stat += sf.G.transpose() * z;
  r.dual = std::max(inf_norm(stat), cone_violation(z, sf.lp_dim, sf.soc_dims)) / cscale;

  r.pcost = sf.c.dot(x);
  r.dcost = -sf.b.dot(y) - sf.h.dot(z);
  r.gap = std::abs(r.pcost - r.dcost) / std::max(1.0, std::min(std::abs(r.pcost), std::abs(r.dcost)));
  return r;
}

Residuals residuals(const SocpProblem& p, const SocpSolution& sol) {
  return residuals(to_standard_form(p), sol.x, sol.y, sol.z);
}

Residuals residuals(const SocpProblem& p, const RealVec& x) {
  const StandardForm sf = to_standard_form(p);
  if (x.size() != sf.c.size()) throw std::invalid_argument("residuals: dimension mismatch");
  Residuals r;
  const RealVec slack = sf.h - sf.G * x;
  r.cone_violation = cone_violation(slack, sf.lp_dim, sf.soc_dims);
  const double eq = sf.b.size() ? inf_norm(sf.A * x - sf.b) / (1.0 + inf_norm(sf.b)) : 0.0;
  r.primal = std::max(eq, r.cone_violation / (1.0 + inf_norm(sf.h)));
  r.pcost = sf.c.dot(x);
  return r;
}

namespace {

// ---------------------------------------------------------------------------
// Cone arithmetic

struct Cones {
  Index lp = 0;
  std::vector<Index> soc;
  Index dim = 0;
  [[nodiscard]] Index degree() const { return lp + static_cast<Index>(soc.size()); }
};

// Nesterov-Todd scaling point for one Lorentz block.
struct SocScale {
  double eta = 1.0;
  RealVec wbar;  // w0 = wbar(0), w1 = wbar.tail
};

struct Scaling {
  RealVec lp_w;  // sqrt(s/z)
  std::vector<SocScale> soc;
  RealVec lambda;
};

double soc_residual(const RealVec& v, Index off, Index q) {
  const double n1 = v.segment(off + 1, q - 1).norm();
  return (v(off) - n1) * (v(off) + n1);
}

// Smallest "eigenvalue" of v with respect to the cone.
double min_cone_eig(const RealVec& v, const Cones& K) {
  double m = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K.lp; ++i) m = std::min(m, v(i));
  Index off = K.lp;
  for (Index q : K.soc) {
    m = std::min(m, v(off) - v.segment(off + 1, q - 1).norm());
    off += q;
  }
  return m;
}

// Shift v into the interior when it is not already well inside.
void shift_into_cone(RealVec& v, const Cones& K) {
  const double alpha = -min_cone_eig(v, K);
  if (!(alpha < -1e-8 * std::max(1.0, v.norm())) || !std::isfinite(alpha)) {
    const double shift = 1.0 + (std::isfinite(alpha) ? std::max(alpha, 0.0) : 0.0);
    for (Index i = 0; i < K.lp; ++i) v(i) += shift;
    Index off = K.lp;
    for (Index q : K.soc) {
      v(off) += shift;
      off += q;
    }
  }
}

Scaling nt_scaling(const RealVec& s, const RealVec& z, const Cones& K) {
  Scaling w;
  w.lambda.resize(K.dim);
  w.lp_w = (s.head(K.lp).array() / z.head(K.lp).array()).sqrt();
  w.lambda.head(K.lp) = (s.head(K.lp).array() * z.head(K.lp).array()).sqrt();
  Index off = K.lp;
  for (Index q : K.soc) {
    const double sres = std::sqrt(std::max(soc_residual(s, off, q), 1e-300));
    const double zres = std::sqrt(std::max(soc_residual(z, off, q), 1e-300));
    const RealVec sb = s.segment(off, q) / sres;
    const RealVec zb = z.segment(off, q) / zres;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    SocScale sc;
    sc.eta = std::sqrt(sres / zres);
    sc.wbar.resize(q);
    sc.wbar(0) = (sb(0) + zb(0)) / (2.0 * gamma);
    sc.wbar.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * gamma);
    // lambda = W z
    const double w0 = sc.wbar(0);
    const auto w1 = sc.wbar.tail(q - 1);
    const auto zz = z.segment(off, q);
    const double w1z1 = w1.dot(zz.tail(q - 1));
    w.lambda(off) = sc.eta * (w0 * zz(0) + w1z1);
    w.lambda.segment(off + 1, q - 1) =
        sc.eta * (zz.tail(q - 1) + (zz(0) + w1z1 / (1.0 + w0)) * w1);
    w.soc.push_back(std::move(sc));
    off += q;
  }
  return w;
}

RealVec apply_w(const Scaling& w, const Cones& K, const RealVec& v, bool inverse) {
  RealVec out(K.dim);
  if (inverse)
    out.head(K.lp) = v.head(K.lp).array() / w.lp_w.array();
  else
    out.head(K.lp) = v.head(K.lp).array() * w.lp_w.array();
  Index off = K.lp;
  for (std::size_t k = 0; k < K.soc.size(); ++k) {
    const Index q = K.soc[k];
    const auto& sc = w.soc[k];
    const double w0 = sc.wbar(0);
    const auto w1 = sc.wbar.tail(q - 1);
    const auto vv = v.segment(off, q);
    const double w1v1 = w1.dot(vv.tail(q - 1));
    if (!inverse) {
      out(off) = sc.eta * (w0 * vv(0) + w1v1);
      out.segment(off + 1, q - 1) = sc.eta * (vv.tail(q - 1) + (vv(0) + w1v1 / (1.0 + w0)) * w1);
    } else {
      out(off) = (w0 * vv(0) - w1v1) / sc.eta;
      out.segment(off + 1, q - 1) = (vv.tail(q - 1) + (-vv(0) + w1v1 / (1.0 + w0)) * w1) / sc.eta;
    }
    off += q;
  }
  return out;
}

RealVec jordan_product(const RealVec& u, const RealVec& v, const Cones& K) {
  RealVec out(K.dim);
  out.head(K.lp) = u.head(K.lp).cwiseProduct(v.head(K.lp));
  Index off = K.lp;
  for (Index q : K.soc) {
    out(off) = u.segment(off, q).dot(v.segment(off, q));
    out.segment(off + 1, q - 1) = u(off) * v.segment(off + 1, q - 1) + v(off) * u.segment(off + 1, q - 1);
    off += q;
  }
  return out;
}

// Solves lambda o x = v.
RealVec jordan_divide(const RealVec& lambda, const RealVec& v, const Cones& K) {
  RealVec out(K.dim);
  out.head(K.lp) = v.head(K.lp).array() / lambda.head(K.lp).array();
  Index off = K.lp;
  for (Index q : K.soc) {
    const double l0 = lambda(off);
    const auto l1 = lambda.segment(off + 1, q - 1);
    const double rho = soc_residual(lambda, off, q);
    const double x0 = (l0 * v(off) - l1.dot(v.segment(off + 1, q - 1))) / rho;
    out(off) = x0;
    out.segment(off + 1, q - 1) = (v.segment(off + 1, q - 1) - x0 * l1) / l0;
    off += q;
  }
  return out;
}

RealVec identity_element(const Cones& K) {
  RealVec e = RealVec::Zero(K.dim);
  e.head(K.lp).setOnes();
  Index off = K.lp;
  for (Index q : K.soc) {
    e(off) = 1.0;
    off += q;
  }
  return e;
}

// Largest alpha with v + alpha dv in the cone (infinity when unbounded).
double max_step(const RealVec& v, const RealVec& dv, const Cones& K) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K.lp; ++i)
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  Index off = K.lp;
  for (Index q : K.soc) {
    const double u0 = v(off), d0 = dv(off);
    const auto u1 = v.segment(off + 1, q - 1);
    const auto d1 = dv.segment(off + 1, q - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = u0 * d0 - u1.dot(d1);
    const double c = std::max(soc_residual(v, off, q), 0.0);
    double root = std::numeric_limits<double>::infinity();
    if (std::abs(a) < 1e-300) {
      if (b < 0.0) root = -c / (2.0 * b);
    } else {
      const double disc = b * b - a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double qq = -(b + (b >= 0.0 ? sq : -sq));
        for (double r : {qq / a, qq != 0.0 ? c / qq : std::numeric_limits<double>::infinity()})
          if (r > 0.0) root = std::min(root, r);
      }
    }
    // The boundary crossing must also keep the leading component nonnegative.
    if (d0 < 0.0) root = std::min(root, std::max(0.0, -u0 / d0));
    alpha = std::min(alpha, root);
    off += q;
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// KKT factorization backends

class KktSolver {
 public:
  virtual ~KktSolver() = default;
  // m holds the lower triangle of the regularized symmetric KKT matrix.
  virtual bool factor(const SparseMat& lower) = 0;
  virtual RealVec solve(const RealVec& rhs) const = 0;
};

class SparseLdlt final : public KktSolver {
 public:
  bool factor(const SparseMat& lower) override {
    if (!analyzed_) {
      ldlt_.analyzePattern(lower);
      analyzed_ = true;
    }
    ldlt_.factorize(lower);
    return ldlt_.info() == Eigen::Success;
  }
  RealVec solve(const RealVec& rhs) const override { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
};

class DenseLu final : public KktSolver {
 public:
  bool factor(const SparseMat& lower) override {
    const SparseMat sym = lower.selfadjointView<Eigen::Lower>();
    RealMat full = RealMat(sym);
    lu_.compute(full);
    return full.allFinite();
  }
  RealVec solve(const RealVec& rhs) const override { return lu_.solve(rhs); }

 private:
  Eigen::PartialPivLU<RealMat> lu_;
};

// Regularized quasi-definite KKT matrix
//   [[ dI,  A^T,  G^T      ],
//    [ A,  -dI,   0        ],
//    [ G,   0,   -W^2 - dI ]]
// stored as its lower triangle. The sparsity pattern is fixed, so the
// scaling block is rewritten in place each iteration.
class KktSystem {
 public:
  KktSystem(const SparseMat& A, const SparseMat& G, const Cones& K, double delta)
      : n_(A.cols()), p_(A.rows()), m_(G.rows()), K_(K), delta_(delta) {
    const Index dim = n_ + p_ + m_;
    std::vector<Triplet> t;
    t.reserve(A.nonZeros() + G.nonZeros() + dim + 8 * m_);
    for (Index i = 0; i < n_; ++i) t.emplace_back(i, i, delta);
    for (Index k = 0; k < A.outerSize(); ++k)
      for (SparseMat::InnerIterator it(A, k); it; ++it) t.emplace_back(n_ + it.row(), it.col(), it.value());
    for (Index k = 0; k < G.outerSize(); ++k)
      for (SparseMat::InnerIterator it(G, k); it; ++it)
        t.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
    for (Index i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -delta);
    const Index z0 = n_ + p_;
    for (Index i = 0; i < K.lp; ++i) t.emplace_back(z0 + i, z0 + i, -1.0);
    Index off = K.lp;
    for (Index q : K.soc) {
      for (Index j = 0; j < q; ++j)
        for (Index i = j; i < q; ++i) t.emplace_back(z0 + off + i, z0 + off + j, i == j ? -1.0 : 0.0);
      off += q;
    }
    mat_.resize(dim, dim);
    mat_.setFromTriplets(t.begin(), t.end());
    mat_.makeCompressed();
    for (Index i = 0; i < n_ + p_; ++i) reg_pos_.push_back(position(i, i));
    // Remember where each scaling entry lives in the value array.
    lp_pos_.resize(K.lp);
    for (Index i = 0; i < K.lp; ++i) lp_pos_[i] = position(z0 + i, z0 + i);
    off = K.lp;
    for (Index q : K.soc) {
      std::vector<Index> pos;
      pos.reserve(q * (q + 1) / 2);
      for (Index j = 0; j < q; ++j)
        for (Index i = j; i < q; ++i) pos.push_back(position(z0 + off + i, z0 + off + j));
      soc_pos_.push_back(std::move(pos));
      off += q;
    }
  }

  void update(const Scaling& w) {
    double* val = mat_.valuePtr();
    for (Index i = 0; i < K_.lp; ++i) val[lp_pos_[i]] = -w.lp_w(i) * w.lp_w(i) - delta_;
    for (std::size_t k = 0; k < K_.soc.size(); ++k) {
      const Index q = K_.soc[k];
      const auto& sc = w.soc[k];
      const double e2 = sc.eta * sc.eta;
      std::size_t idx = 0;
      for (Index j = 0; j < q; ++j)
        for (Index i = j; i < q; ++i) {
          // W^2 = eta^2 (2 wbar wbar^T - J), J = diag(1, -1, ..., -1)
          double v = 2.0 * sc.wbar(i) * sc.wbar(j);
          if (i == j) v += (i == 0 ? -1.0 : 1.0);
          val[soc_pos_[k][idx++]] = -e2 * v - (i == j ? delta_ : 0.0);
        }
    }
  }

  double delta() const { return delta_; }

  // Static regularization too small for the scale of the data can cancel to
  // an exact zero pivot; the caller raises it and refactors.
  void set_delta(double delta, const Scaling& w) {
    delta_ = delta;
    double* val = mat_.valuePtr();
    for (Index i = 0; i < n_ + p_; ++i) val[reg_pos_[i]] = i < n_ ? delta : -delta;
    update(w);
  }

  // K0 v with the regularization removed.
  RealVec multiply_unregularized(const RealVec& v) const {
    RealVec out = mat_.selfadjointView<Eigen::Lower>() * v;
    out.head(n_) -= delta_ * v.head(n_);
    out.tail(p_ + m_) += delta_ * v.tail(p_ + m_);
    return out;
  }

  const SparseMat& matrix() const { return mat_; }

 private:
  Index position(Index row, Index col) const {
    const Index start = mat_.outerIndexPtr()[col];
    const Index end = mat_.outerIndexPtr()[col + 1];
    const int* inner = mat_.innerIndexPtr();
    const int* hit = std::lower_bound(inner + start, inner + end, static_cast<int>(row));
    if (hit == inner + end || *hit != row) throw std::logic_error("KKT pattern entry missing");
    return hit - inner;
  }

  Index n_, p_, m_;
  Cones K_;
  double delta_;
  SparseMat mat_;
  std::vector<Index> reg_pos_;
  std::vector<Index> lp_pos_;
  std::vector<std::vector<Index>> soc_pos_;
};

RealVec refined_solve(const KktSystem& sys, const KktSolver& solver, const RealVec& rhs) {
  RealVec x = solver.solve(rhs);
  const double scale = 1.0 + inf_norm(rhs);
  for (int k = 0; k < 8; ++k) {
    const RealVec r = rhs - sys.multiply_unregularized(x);
    if (!(inf_norm(r) > 1e-14 * scale)) break;
    x += solver.solve(r);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Equilibration

struct Equilibration {
  RealVec D;   // columns
  RealVec EA;  // equality rows
  RealVec EG;  // cone rows (constant inside each Lorentz block)
};

Equilibration equilibrate(SparseMat& A, SparseMat& G, const Cones& K) {
  Equilibration eq{RealVec::Ones(A.cols()), RealVec::Ones(A.rows()), RealVec::Ones(G.rows())};
  auto clamp = [](double v) { return v < 1e-4 ? 1.0 : std::min(v, 1e4); };
  for (int iter = 0; iter < 10; ++iter) {
    RealVec col = RealVec::Zero(A.cols());
    RealVec rowA = RealVec::Zero(A.rows());
    RealVec rowG = RealVec::Zero(G.rows());
    for (Index k = 0; k < A.outerSize(); ++k)
      for (SparseMat::InnerIterator it(A, k); it; ++it) {
        const double v = std::abs(it.value());
        col(it.col()) = std::max(col(it.col()), v);
        rowA(it.row()) = std::max(rowA(it.row()), v);
      }
    for (Index k = 0; k < G.outerSize(); ++k)
      for (SparseMat::InnerIterator it(G, k); it; ++it) {
        const double v = std::abs(it.value());
        col(it.col()) = std::max(col(it.col()), v);
        rowG(it.row()) = std::max(rowG(it.row()), v);
      }
    Index off = K.lp;
    for (Index q : K.soc) {
      const double mx = rowG.segment(off, q).maxCoeff();
      rowG.segment(off, q).setConstant(mx);
      off += q;
    }
    RealVec dc(col.size()), da(rowA.size()), dg(rowG.size());
    for (Index i = 0; i < col.size(); ++i) dc(i) = 1.0 / std::sqrt(clamp(col(i)));
    for (Index i = 0; i < rowA.size(); ++i) da(i) = 1.0 / std::sqrt(clamp(rowA(i)));
    for (Index i = 0; i < rowG.size(); ++i) dg(i) = 1.0 / std::sqrt(clamp(rowG(i)));
    A = da.asDiagonal() * A * dc.asDiagonal();
    G = dg.asDiagonal() * G * dc.asDiagonal();
    eq.D = eq.D.cwiseProduct(dc);
    eq.EA = eq.EA.cwiseProduct(da);
    eq.EG = eq.EG.cwiseProduct(dg);
    if ((col.array() - 1.0).abs().maxCoeff() < 0.1 &&
        (rowG.size() == 0 || (rowG.array() - 1.0).abs().maxCoeff() < 0.1))
      break;
  }
  return eq;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior point method

struct Iterate {
  RealVec x, y, z, s;
  double tau = 1.0, kappa = 1.0;
};

SocpSolution interior_point(const SocpProblem& problem, const SolverOptions& opts,
                            std::unique_ptr<KktSolver> solver) {
  if (!(opts.tol >= 1e-12 && opts.tol <= 1e-3))
    throw std::invalid_argument("solver tolerance must lie in [1e-12, 1e-3]");
  const StandardForm sf = to_standard_form(problem);
  Cones K;
  K.lp = sf.lp_dim;
  K.soc = sf.soc_dims;
  K.dim = sf.cone_dim();
  const Index n = sf.c.size(), p = sf.b.size(), m = K.dim;

  SparseMat A = sf.A, G = sf.G;
  const Equilibration eq = equilibrate(A, G, K);
  const RealVec c = eq.D.cwiseProduct(sf.c);
  const RealVec b = eq.EA.cwiseProduct(sf.b);
  const RealVec h = eq.EG.cwiseProduct(sf.h);

  constexpr double kDelta = 1e-9;
  KktSystem sys(A, G, K, kDelta);

  auto factor = [&](const Scaling& w) {
    sys.update(w);
    while (!solver->factor(sys.matrix())) {
      if (sys.delta() >= 1e-5) return false;
      sys.set_delta(sys.delta() * 100.0, w);
    }
    return true;
  };

  SocpSolution best;
  best.status = SolveStatus::MaxIter;
  double best_merit = std::numeric_limits<double>::infinity();

  auto unscale = [&](const Iterate& it, SocpSolution& out) {
    out.x = eq.D.cwiseProduct(it.x) / it.tau;
    out.y = eq.EA.cwiseProduct(it.y) / it.tau;
    out.z = eq.EG.cwiseProduct(it.z) / it.tau;
    out.s = it.s.cwiseQuotient(eq.EG) / it.tau;
  };

  // Initial point.
  Iterate it;
  {
    Scaling ident;
    ident.lp_w = RealVec::Ones(K.lp);
    for (Index q : K.soc) {
      SocScale sc;
      sc.eta = 1.0;
      sc.wbar = RealVec::Zero(q);
      sc.wbar(0) = 1.0;
      ident.soc.push_back(sc);
    }
    if (!factor(ident)) {
      best.iterations = 0;
      best.x = RealVec::Zero(n);
      best.y = RealVec::Zero(p);
      best.z = RealVec::Zero(m);
      best.s = RealVec::Zero(m);
      return best;
    }
    RealVec rhs(n + p + m);
    rhs << RealVec::Zero(n), b, h;
    RealVec sol = refined_solve(sys, *solver, rhs);
    it.x = sol.head(n);
    it.s = -sol.tail(m);
    shift_into_cone(it.s, K);
    rhs << -c, RealVec::Zero(p), RealVec::Zero(m);
    sol = refined_solve(sys, *solver, rhs);
    it.y = sol.segment(n, p);
    it.z = sol.tail(m);
    shift_into_cone(it.z, K);
  }

  const RealVec e = identity_element(K);
  const double degree = static_cast<double>(K.degree());
  const double bh_scale = std::max(1.0, std::max(inf_norm(b), inf_norm(h)));
  const double c_scale = std::max(1.0, inf_norm(c));

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    // Termination on the unscaled problem.
    SocpSolution cand;
    unscale(it, cand);
    const Residuals res = residuals(sf, cand.x, cand.y, cand.z);
    cand.iterations = iter;
    cand.objective_value = res.pcost;
    cand.primal_residual = res.primal;
    cand.dual_residual = res.dual;
    cand.duality_gap = res.gap;
    const double merit = std::max({res.primal, res.dual, res.gap});
    if (std::isfinite(merit) && merit < best_merit) {
      best_merit = merit;
      best = cand;
      best.status = SolveStatus::MaxIter;
    }
    if (res.primal <= opts.tol && res.dual <= opts.tol && res.gap <= opts.tol) {
      cand.status = SolveStatus::Optimal;
      return cand;
    }

    // Certificates of infeasibility.
    const double btyhtz = b.dot(it.y) + h.dot(it.z);
    if (btyhtz < -1e-12) {
      RealVec aty = G.transpose() * it.z;
      if (p) aty += A.transpose() * it.y;
      if (inf_norm(aty) / c_scale <= opts.tol * (-btyhtz) / bh_scale * 10.0 && it.tau < it.kappa) {
        SocpSolution cert;
        cert.status = SolveStatus::Infeasible;
        cert.x = RealVec::Zero(n);
        cert.y = eq.EA.cwiseProduct(it.y) / (-btyhtz);
        cert.z = eq.EG.cwiseProduct(it.z) / (-btyhtz);
        cert.s = RealVec::Zero(m);
        cert.iterations = iter;
        cert.objective_value = std::numeric_limits<double>::infinity();
        return cert;
      }
    }
    const double ctx = c.dot(it.x);
    if (ctx < -1e-12) {
      double pr = inf_norm(G * it.x + it.s);
      if (p) pr = std::max(pr, inf_norm(A * it.x));
      if (pr / bh_scale <= opts.tol * (-ctx) / c_scale * 10.0 && it.tau < it.kappa) {
        SocpSolution cert;
        cert.status = SolveStatus::Unbounded;
        cert.x = eq.D.cwiseProduct(it.x) / (-ctx);
        cert.y = RealVec::Zero(p);
        cert.z = RealVec::Zero(m);
        cert.s = it.s.cwiseQuotient(eq.EG) / (-ctx);
        cert.iterations = iter;
        cert.objective_value = -std::numeric_limits<double>::infinity();
        return cert;
      }
    }
    if (iter == opts.max_iter) break;

    // Residuals of the embedding.
    RealVec r1 = G.transpose() * it.z + c * it.tau;
    if (p) r1 += A.transpose() * it.y;
    const RealVec r2 = p ? RealVec(-(A * it.x) + b * it.tau) : RealVec(RealVec::Zero(0));
    const RealVec r3 = -(G * it.x) + h * it.tau - it.s;
    const double r4 = -c.dot(it.x) - b.dot(it.y) - h.dot(it.z) - it.kappa;
    const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / (degree + 1.0);

    const Scaling w = nt_scaling(it.s, it.z, K);
    if (!factor(w)) break;

    RealVec rhs_tau(n + p + m);
    rhs_tau << -c, b, h;
    const RealVec u1 = refined_solve(sys, *solver, rhs_tau);
    const double cbh1 = c.dot(u1.head(n)) + b.dot(u1.segment(n, p)) + h.dot(u1.tail(m));

    struct Direction {
      RealVec dx, dy, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double eta, const RealVec& d_s, double d_kappa) {
      const RealVec wld = apply_w(w, K, jordan_divide(w.lambda, d_s, K), false);
      RealVec rhs(n + p + m);
      rhs << -eta * r1, eta * r2, eta * r3 - wld;
      const RealVec u2 = refined_solve(sys, *solver, rhs);
      const double cbh2 = c.dot(u2.head(n)) + b.dot(u2.segment(n, p)) + h.dot(u2.tail(m));
      Direction d;
      const double denom = it.kappa / it.tau - cbh1;
      d.dtau = (-eta * r4 + d_kappa / it.tau + cbh2) / denom;
      const RealVec u = u2 + d.dtau * u1;
      d.dx = u.head(n);
      d.dy = u.segment(n, p);
      d.dz = u.tail(m);
      // ds = W (lambda \ d_s) - W^2 dz
      d.ds = wld - apply_w(w, K, apply_w(w, K, d.dz, false), false);
      d.dkappa = (d_kappa - it.kappa * d.dtau) / it.tau;
      return d;
    };
    auto step_to_boundary = [&](const Direction& d) {
      double a = std::min(max_step(it.s, d.ds, K), max_step(it.z, d.dz, K));
      if (d.dtau < 0.0) a = std::min(a, -it.tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -it.kappa / d.dkappa);
      return a;
    };

    // Predictor.
    const RealVec lam2 = jordan_product(w.lambda, w.lambda, K);
    const Direction aff = direction(1.0, -lam2, -it.tau * it.kappa);
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    // Corrector.
    const RealVec corr = jordan_product(apply_w(w, K, aff.ds, true), apply_w(w, K, aff.dz, false), K);
    const RealVec d_s = -lam2 - corr + sigma * mu * e;
    const double d_kappa = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction dir = direction(1.0 - sigma, d_s, d_kappa);
    const double alpha = std::min(1.0, 0.99 * step_to_boundary(dir));
    if (!std::isfinite(alpha) || alpha < 1e-12) break;

    it.x += alpha * dir.dx;
    it.y += alpha * dir.dy;
    it.z += alpha * dir.dz;
    it.s += alpha * dir.ds;
    it.tau += alpha * dir.dtau;
    it.kappa += alpha * dir.dkappa;
    if (!it.x.allFinite() || !it.z.allFinite() || !it.s.allFinite() || !(it.tau > 0.0)) break;
  }
  return best;
}

SocpSolution reference_backend(const SocpProblem& p, const SolverOptions& opts) {
  return interior_point(p, opts, std::make_unique<SparseLdlt>());
}

SocpSolution dense_backend(const SocpProblem& p, const SolverOptions& opts) {
  return interior_point(p, opts, std::make_unique<DenseLu>());
}

struct Registry {
  std::mutex mu;
  std::map<std::string, SolverBackend> backends{{"reference", reference_backend},
                                                {"dense", dense_backend}};
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

SocpSolution solve(const SocpProblem& p, const SolverOptions& opts) {
  SolverBackend fn;
  {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    const auto found = r.backends.find(opts.backend);
    if (found == r.backends.end()) throw std::invalid_argument("unknown solver backend: " + opts.backend);
    fn = found->second;
  }
  return fn(p, opts);
}

SocpSolution solve(const SocpProblem& p, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve(p, opts);
}

void register_backend(const std::string& name, SolverBackend backend) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  r.backends[name] = std::move(backend);
}

std::vector<std::string> backend_names() {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  std::vector<std::string> names;
  for (const auto& [name, fn] : r.backends) names.push_back(name);
  return names;
}

}  // namespace ccp3
