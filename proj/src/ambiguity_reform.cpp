#include "ccp3/ambiguity_reform.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ccp3 {

using Index = Eigen::Index;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string level_text(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

void require_level(const AmbiguitySpec& spec, double p, const std::string& what) {
  const auto range = level_range(spec);
  if (!range.contains(p)) {
    throw std::invalid_argument(what + " " + level_text(p) + " outside the admissible range " +
                                (range.closed_low ? "[" : "(") + level_text(range.lo) + ", 1) for " +
                                spec_name(spec));
  }
}

double cantelli(double p) { return std::sqrt(p / (1.0 - p)); }

void require_psd_bound(const RealMat& L, Index dim, std::size_t idx) {
  const std::string name = "covariance bound " + std::to_string(idx);
  if (L.rows() != dim || L.cols() != dim)
    throw std::invalid_argument(name + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw std::invalid_argument(name + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<RealMat> es(L, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -kPsdTol * std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw std::invalid_argument(name + " is not positive semidefinite");
}

const MomentTriple& ellipsoid_nominal(const MomentsEllipsoid& e, const ConstraintRow& row,
                                      std::size_t idx, MomentTriple& storage) {
  if (e.nominal.empty()) {
    storage = row.stacked();
    return storage;
  }
  return e.nominal.size() == 1 ? e.nominal.front() : e.nominal.at(idx);
}

}  // namespace

std::string spec_name(const AmbiguitySpec& spec) {
  return std::visit(Overloaded{
                        [](const CesKnown& s) { return family_name(s.family); },
                        [](const MomentExact&) { return std::string("moment_exact"); },
                        [](const MomentSymmetric&) { return std::string("moment_symmetric"); },
                        [](const CovBounded&) { return std::string("cov_bounded"); },
                        [](const MomentsEllipsoid&) { return std::string("moments_ellipsoid"); },
                        [](const NormSupport&) { return std::string("norm_support"); },
                        [](const DataDriven&) { return std::string("data_driven"); },
                    },
                    spec);
}

std::string spec_semantics(const AmbiguitySpec& spec) {
  if (const auto* ces = std::get_if<CesKnown>(&spec))
    return has_finite_variance(ces->family) ? "exact" : "heuristic (infinite variance)";
  if (std::holds_alternative<NormSupport>(spec)) return "conservative (sufficient condition)";
  return "distributionally robust";
}

LevelRange level_range(const AmbiguitySpec& spec) {
  if (std::holds_alternative<CesKnown>(spec) || std::holds_alternative<MomentSymmetric>(spec))
    return {0.5, true};
  return {0.0, false};
}

double safety_factor(const AmbiguitySpec& spec, double p) {
  require_level(spec, p, "level");
  return std::visit(Overloaded{
                        [&](const CesKnown& s) { return marginal_quantile(s.family, p); },
                        [&](const MomentSymmetric&) { return 1.0 / std::sqrt(2.0 * (1.0 - p)); },
                        [&](const NormSupport&) { return std::sqrt(-2.0 * std::log1p(-p)); },
                        [&](const auto&) { return cantelli(p); },
                    },
                    spec);
}

double safety_factor_derivative(const AmbiguitySpec& spec, double p) {
  const double k = safety_factor(spec, p);
  return std::visit(Overloaded{
                        [&](const CesKnown& s) { return 1.0 / marginal_pdf(s.family, k); },
                        [&](const MomentSymmetric&) { return std::pow(2.0 * (1.0 - p), -1.5); },
                        [&](const NormSupport&) { return 1.0 / (k * (1.0 - p)); },
                        [&](const auto&) { return 1.0 / (2.0 * k * (1.0 - p) * (1.0 - p)); },
                    },
                    spec);
}

void Problem3CP::validate() const {
  if (n <= 0) throw std::invalid_argument("problem dimension must be positive");
  if (random_objective) {
    if (random_objective->dim() != n) throw std::invalid_argument("random objective has wrong dimension");
    require_valid(*random_objective, "random objective");
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("objective level p0 must lie in (0, 1)");
  } else {
    if (c.size() != n) throw std::invalid_argument("objective vector has wrong dimension");
    if (!c.allFinite()) throw std::invalid_argument("objective vector has non-finite entries");
  }
  if (levels.size() != rows.size())
    throw std::invalid_argument("one probability level per constraint row is required");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string name = "row " + std::to_string(i);
    if (r.dim() != n) throw std::invalid_argument(name + " has wrong dimension");
    require_valid(r.a, name);
    if (!(r.b_var >= 0.0) || !std::isfinite(r.b_var) || !std::isfinite(r.b_mean))
      throw std::invalid_argument(name + ": b moments must be finite with b_var >= 0");
    if (!(levels[i] > 0.0 && levels[i] < 1.0))
      throw std::invalid_argument(name + ": level must lie in (0, 1)");
  }
}

void validate_spec(const AmbiguitySpec& spec, const Problem3CP& problem) {
  for (std::size_t i = 0; i < problem.levels.size(); ++i)
    require_level(spec, problem.levels[i], "row " + std::to_string(i) + " level");
  if (problem.random_objective) require_level(spec, problem.p0, "objective level");
  const Index n = problem.n;
  const std::size_t m = problem.rows.size();
  auto count_ok = [&](std::size_t k) { return k == 1 || k == m; };
  std::visit(Overloaded{
                 [&](const CesKnown& s) { (void)canonical(s.family); },
                 [](const MomentExact&) {},
                 [](const MomentSymmetric&) {},
                 [&](const CovBounded& s) {
                   if (!count_ok(s.bounds.size()))
                     throw std::invalid_argument("covariance bounds: give one matrix or one per row");
                   for (std::size_t k = 0; k < s.bounds.size(); ++k) require_psd_bound(s.bounds[k], 2 * (n + 1), k);
                 },
                 [&](const MomentsEllipsoid& s) {
                   if (!(s.zeta >= 0.0) || !std::isfinite(s.zeta))
                     throw std::invalid_argument("ellipsoid size zeta must be finite and >= 0");
                   if (!s.nominal.empty() && !count_ok(s.nominal.size()))
                     throw std::invalid_argument("ellipsoid nominal moments: give one triple or one per row");
                   for (std::size_t k = 0; k < s.nominal.size(); ++k) {
                     if (s.nominal[k].dim() != n + 1)
                       throw std::invalid_argument("ellipsoid nominal moments must have dimension n+1");
                     require_valid(s.nominal[k], "ellipsoid nominal " + std::to_string(k));
                   }
                 },
                 [&](const NormSupport& s) {
                   if (s.l.size() != n + 1) throw std::invalid_argument("norm bounds need n+1 entries");
                   for (Index k = 0; k < s.l.size(); ++k)
                     if (!(s.l(k) > 0.0) || !std::isfinite(s.l(k)))
                       throw std::invalid_argument("norm bound l_" + std::to_string(k + 1) + " must be positive");
                 },
                 [&](const DataDriven& s) {
                   if (!count_ok(s.rows.size()))
                     throw std::invalid_argument("data-driven estimates: give one entry or one per row");
                   for (std::size_t k = 0; k < s.rows.size(); ++k) {
                     const auto& r = s.rows[k];
                     if (!(r.r1 >= 0.0) || !(r.r2 >= 0.0) || !std::isfinite(r.r1) || !std::isfinite(r.r2))
                       throw std::invalid_argument("data-driven radii must be finite and >= 0");
                     if (r.est.dim() != n + 1)
                       throw std::invalid_argument("data-driven estimates must have dimension n+1");
                     require_valid(r.est, "data-driven estimate " + std::to_string(k));
                   }
                 },
             },
             spec);
}

RowCounterpart row_counterpart(const AmbiguitySpec& spec, const ConstraintRow& row, std::size_t idx,
                               double p) {
  const Index n = row.dim();
  RowCounterpart rc;
  rc.k = safety_factor(spec, p);
  auto from_triple = [&](const MomentTriple& d) {
    rc.mean = stack(d.mean);
    rc.F = psd_factor(augmented_covariance(d.cov, d.pcov));
  };
  std::visit(Overloaded{
                 [&](const CovBounded& s) {
                   const RealMat& L = s.bounds.size() == 1 ? s.bounds.front() : s.bounds.at(idx);
                   require_psd_bound(L, 2 * (n + 1), idx);
                   rc.mean = stack(row.stacked().mean);
                   rc.F = psd_factor(L);
                 },
                 [&](const MomentsEllipsoid& s) {
                   MomentTriple storage;
                   const MomentTriple& nom = ellipsoid_nominal(s, row, idx, storage);
                   if (nom.dim() != n + 1)
                     throw std::invalid_argument("ellipsoid nominal moments must have dimension n+1");
                   from_triple(nom);
                   if (s.zeta > 0.0) {
                     Eigen::SelfAdjointEigenSolver<ComplexMat> es(nom.cov, Eigen::EigenvaluesOnly);
                     const double top = es.eigenvalues().cwiseAbs().maxCoeff();
                     if (!(es.eigenvalues()(0) >= 1e-10 * top) || top == 0.0)
                       throw std::invalid_argument("ellipsoid nominal covariance must be positive definite");
                     // Support function of the mean ellipsoid: sqrt(zeta) ||G^{1/2} conj(z~)||.
                     rc.H = std::sqrt(s.zeta) * real_representation(hermitian_sqrt(nom.cov));
                   }
                 },
                 [&](const NormSupport& s) {
                   if (s.l.size() != n + 1) throw std::invalid_argument("norm bounds need n+1 entries");
                   rc.mean = stack(row.stacked().mean);
                   RealVec diag = RealVec::Zero(2 * (n + 1));
                   diag.head(n + 1) = s.l;
                   diag.segment(n + 1, n) = s.l.head(n);
                   rc.F = diag.asDiagonal();
                 },
                 [&](const DataDriven& s) {
                   const DataDrivenRow& dd = s.rows.size() == 1 ? s.rows.front() : s.rows.at(idx);
                   if (dd.est.dim() != n + 1)
                     throw std::invalid_argument("data-driven estimates must have dimension n+1");
                   if (dd.r2 == 0.0) {
                     from_triple(dd.est);
                   } else {
                     const ComplexMat shift = ComplexMat::Identity(n + 1, n + 1) * dd.r2;
                     rc.mean = stack(dd.est.mean);
                     rc.F = psd_factor(augmented_covariance(dd.est.cov + shift, dd.est.pcov + shift));
                   }
                   if (dd.r1 > 0.0) rc.H = dd.r1 * RealMat::Identity(2 * (n + 1), 2 * (n + 1));
                 },
                 [&](const auto&) { from_triple(row.stacked()); },
             },
             spec);
  return rc;
}

AffineMap row_argument(Index nvars, Index re_col, Index im_col, Index n) {
  AffineMap map;
  map.M.resize(2 * (n + 1), nvars);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * n);
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, re_col + i, 1.0);
    t.emplace_back(n + 1 + i, im_col + i, -1.0);
  }
  map.M.setFromTriplets(t.begin(), t.end());
  map.offset = RealVec::Zero(2 * (n + 1));
  map.offset(n) = -1.0;
  return map;
}

ConeBlock cone_from_map(const RealMat& F, const AffineMap& arg, const SparseVec& c, double d) {
  if (F.cols() != arg.M.rows()) throw std::invalid_argument("cone_from_map: dimension mismatch");
  ConeBlock blk;
  const SparseMat Fs = F.sparseView();
  blk.A = Fs * arg.M;
  blk.b = F * arg.offset;
  blk.c = c;
  blk.d = d;
  return blk;
}

std::vector<ConeBlock> counterpart_blocks(const RowCounterpart& rc, Index nvars, Index n,
                                          std::optional<Index> aux_col) {
  const AffineMap arg = row_argument(nvars, 0, n, n);
  SparseVec c = (-(arg.M.transpose() * rc.mean)).sparseView();
  double d = -rc.mean.dot(arg.offset);
  std::vector<ConeBlock> out;
  if (rc.H.rows() > 0) {
    if (!aux_col) throw std::invalid_argument("counterpart_blocks: auxiliary variable required");
    SparseVec e(nvars);
    e.insert(*aux_col) = 1.0;
    out.push_back(cone_from_map(rc.H, arg, e, 0.0));
    c.coeffRef(*aux_col) -= 1.0;
  }
  if (rc.k == 0.0 || rc.F.rows() == 0)
    out.push_back(cone_from_map(RealMat::Zero(0, arg.M.rows()), arg, c, d));
  else
    out.push_back(cone_from_map(rc.k * rc.F, arg, c, d));
  return out;
}

ConstraintReformulation reformulate_constraint(const AmbiguitySpec& spec, const ConstraintRow& row,
                                               double p, Index n, std::size_t row_index) {
  if (row.dim() != n) throw std::invalid_argument("row dimension does not match n");
  require_valid(row.a, "row");
  if (row.b_var < 0.0) throw std::invalid_argument("row has negative b variance");
  const RowCounterpart rc = row_counterpart(spec, row, row_index, p);
  ConstraintReformulation out;
  const bool aux = rc.H.rows() > 0;
  out.nvars = 2 * n + (aux ? 1 : 0);
  out.blocks = counterpart_blocks(rc, out.nvars, n, aux ? std::optional<Index>(2 * n) : std::nullopt);
  return out;
}

SocpProblem reformulate_problem(const Problem3CP& problem, const AmbiguitySpec& spec) {
  problem.validate();
  validate_spec(spec, problem);
  const Index n = problem.n;
  std::vector<RowCounterpart> rcs;
  rcs.reserve(problem.m());
  Index aux = 0;
  for (std::size_t i = 0; i < problem.m(); ++i) {
    rcs.push_back(row_counterpart(spec, problem.rows[i], i, problem.levels[i]));
    if (rcs.back().H.rows() > 0) ++aux;
  }
  const bool epigraph = problem.random_objective.has_value();
  const Index nvars = 2 * n + (epigraph ? 1 : 0) + aux;
  SocpProblem socp(nvars);

  if (epigraph) {
    const Index t = 2 * n;
    socp.objective(t) = 1.0;
    const MomentTriple& obj = *problem.random_objective;
    AffineMap v;
    v.M.resize(2 * n, nvars);
    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 0; i < 2 * n; ++i) trip.emplace_back(i, i, 1.0);
    v.M.setFromTriplets(trip.begin(), trip.end());
    v.offset = RealVec::Zero(2 * n);
    const double k0 = safety_factor(spec, problem.p0);
    const RealMat F = psd_factor(augmented_covariance(obj.cov, obj.pcov));
    SparseVec c = (-(v.M.transpose() * stack(obj.mean))).sparseView();
    c.coeffRef(t) += 1.0;
    socp.cone_blocks.push_back(cone_from_map(k0 * F, v, c, 0.0));
  } else {
    socp.objective.head(n) = problem.c.real();
    socp.objective.segment(n, n) = problem.c.imag();
  }

  Index next_aux = 2 * n + (epigraph ? 1 : 0);
  for (const auto& rc : rcs) {
    std::optional<Index> col;
    if (rc.H.rows() > 0) col = next_aux++;
    for (auto& blk : counterpart_blocks(rc, nvars, n, col)) socp.cone_blocks.push_back(std::move(blk));
  }
  if (problem.sign_constraints)
    for (Index i = 0; i < 2 * n; ++i) socp.nonneg_indices.push_back(i);
  return socp;
}

ComplexVec decision_from(const RealVec& x, Index n) {
  if (x.size() < 2 * n) throw std::invalid_argument("decision_from: solution too short");
  return unstack(x.head(2 * n));
}

}  // namespace ccp3
