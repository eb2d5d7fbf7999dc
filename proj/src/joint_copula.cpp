#include "ccp3/joint_copula.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccp3 {

using Index = Eigen::Index;

namespace {

void require_theta(CopulaParam theta) {
  if (!(theta.theta >= 1.0) || !std::isfinite(theta.theta))
    throw std::invalid_argument("copula parameter theta must be >= 1");
}

void require_weight(double y) {
  if (!(y > 0.0 && y <= 1.0)) throw std::invalid_argument("weight y must lie in (0, 1]");
}

double split_level(double p, CopulaParam theta, double y) {
  return std::pow(p, std::pow(y, 1.0 / theta.theta));
}

void require_points(const std::vector<double>& points) {
  if (points.empty()) throw std::invalid_argument("at least one tangent point is required");
  for (std::size_t l = 0; l < points.size(); ++l) {
    require_weight(points[l]);
    if (l > 0 && !(points[l] > points[l - 1]))
      throw std::invalid_argument("tangent points must be strictly increasing");
  }
}

}  // namespace

double gumbel_copula(const std::vector<double>& u, CopulaParam theta) {
  require_theta(theta);
  if (u.empty()) throw std::invalid_argument("gumbel_copula: empty argument");
  for (double v : u)
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("copula arguments must lie in (0, 1]");
  if (theta.theta == 1.0) {
    double prod = 1.0;
    for (double v : u) prod *= v;
    return prod;
  }
  double sum = 0.0;
  for (double v : u) sum += std::pow(-std::log(v), theta.theta);
  return std::exp(-std::pow(sum, 1.0 / theta.theta));
}

std::vector<double> decompose_joint(double p, const std::vector<double>& y, CopulaParam theta) {
  require_theta(theta);
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("joint level must lie in (0, 1)");
  if (y.empty()) throw std::invalid_argument("decompose_joint: no weights");
  double sum = 0.0;
  for (double v : y) {
    if (!(v > 0.0)) throw std::invalid_argument("weights must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
  std::vector<double> out;
  out.reserve(y.size());
  for (double v : y) out.push_back(split_level(p, theta, v));
  return out;
}

double kp_y(const AmbiguitySpec& spec, double p, CopulaParam theta, double y) {
  require_theta(theta);
  require_weight(y);
  if (!level_range(spec).contains(p)) throw std::invalid_argument("joint level outside the model's range");
  return safety_factor(spec, split_level(p, theta, y));
}

double kp_y_prime(const AmbiguitySpec& spec, double p, CopulaParam theta, double y) {
  require_theta(theta);
  require_weight(y);
  if (!level_range(spec).contains(p)) throw std::invalid_argument("joint level outside the model's range");
  const double inv = 1.0 / theta.theta;
  const double q = split_level(p, theta, y);
  const double dq = q * std::log(p) * std::pow(y, inv - 1.0) * inv;
  return safety_factor_derivative(spec, q) * dq;
}

double max_of_pieces(const PieceCoeffs& pieces, double y) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pc : pieces) best = std::max(best, pc(y));
  return best;
}

PieceCoeffs tangent_underestimator(const AmbiguitySpec& spec, double p, CopulaParam theta,
                                   const std::vector<double>& points) {
  require_points(points);
  PieceCoeffs out;
  out.reserve(points.size());
  for (double t : points) {
    const double beta = kp_y_prime(spec, p, theta, t);
    out.push_back({kp_y(spec, p, theta, t) - beta * t, beta});
  }
  return out;
}

PieceCoeffs interp_overestimator(const AmbiguitySpec& spec, double p, CopulaParam theta,
                                 const std::vector<double>& points) {
  require_points(points);
  if (points.size() < 2) throw std::invalid_argument("interpolation needs at least two points");
  std::vector<double> K;
  K.reserve(points.size());
  for (double t : points) K.push_back(kp_y(spec, p, theta, t));
  PieceCoeffs out;
  for (std::size_t l = 0; l + 1 < points.size(); ++l) {
    const double t0 = points[l], t1 = points[l + 1];
    out.push_back({(t1 * K[l] - t0 * K[l + 1]) / (t1 - t0), (K[l + 1] - K[l]) / (t1 - t0)});
  }
  return out;
}

std::vector<double> geometric_points(std::size_t count, double lo) {
  if (count == 0) throw std::invalid_argument("geometric_points: count must be positive");
  if (!(lo > 0.0 && lo <= 1.0)) throw std::invalid_argument("geometric_points: lo must lie in (0, 1]");
  if (count == 1) return {1.0};
  std::vector<double> pts(count);
  const double step = -std::log(lo) / static_cast<double>(count - 1);
  for (std::size_t l = 0; l < count; ++l) pts[l] = lo * std::exp(step * static_cast<double>(l));
  pts.back() = 1.0;
  return pts;
}

JointSocp build_joint_socp(const Problem3CP& problem, const AmbiguitySpec& spec, double p,
                           const JointApproxConfig& config) {
  problem.validate();
  if (!problem.sign_constraints)
    throw std::invalid_argument("the joint formulation needs sign constraints Re z >= 0, Im z >= 0");
  if (problem.random_objective)
    throw std::invalid_argument("the joint formulation needs a deterministic objective");
  if (problem.rows.empty()) throw std::invalid_argument("the joint formulation needs at least one row");
  require_theta(config.theta);
  if (!level_range(spec).contains(p)) throw std::invalid_argument("joint level outside the model's range");
  {
    Problem3CP check = problem;
    std::fill(check.levels.begin(), check.levels.end(), p);
    validate_spec(spec, check);
  }

  JointSocp js;
  js.pieces = config.mode == BoundMode::Lower
                  ? tangent_underestimator(spec, p, config.theta, config.points)
                  : interp_overestimator(spec, p, config.theta, config.points);
  const Index n = problem.n;
  const std::size_t m = problem.m();
  js.layout.n = n;
  js.layout.m = m;

  // The y-dependence enters only through k; extra norm terms stay on z.
  std::vector<RowCounterpart> rcs;
  Index aux = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rcs.push_back(row_counterpart(spec, problem.rows[i], i, p));
    if (rcs.back().H.rows() > 0) ++aux;
  }
  const Index base = 2 * n + 4 * n * static_cast<Index>(m);
  js.layout.nvars = base + aux;
  const Index nvars = js.layout.nvars;
  SocpProblem socp(nvars);
  socp.objective.head(n) = problem.c.real();
  socp.objective.segment(n, n) = problem.c.imag();

  const JointLayout& L = js.layout;
  const AffineMap wz = row_argument(nvars, L.z_re(), L.z_im(), n);
  Index next_aux = base;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& rc = rcs[i];
    SparseVec c = (-(wz.M.transpose() * rc.mean)).sparseView();
    const double d = -rc.mean.dot(wz.offset);
    if (rc.H.rows() > 0) {
      SparseVec e(nvars);
      e.insert(next_aux) = 1.0;
      socp.cone_blocks.push_back(cone_from_map(rc.H, wz, e, 0.0));
      c.coeffRef(next_aux) -= 1.0;
      ++next_aux;
    }
    const AffineMap wr = row_argument(nvars, L.r_re(i), L.r_im(i), n);
    socp.cone_blocks.push_back(cone_from_map(rc.F, wr, c, d));
  }

  // alpha_l z_j + beta_l w_ij - r_ij <= 0, separately on real and imaginary parts.
  const Index rows = 2 * n * static_cast<Index>(m) * static_cast<Index>(js.pieces.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * rows);
  Index row = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      for (const auto& pc : js.pieces)
        for (int part = 0; part < 2; ++part) {
          const Index zc = (part == 0 ? L.z_re() : L.z_im()) + j;
          const Index wc = (part == 0 ? L.w_re(i) : L.w_im(i)) + j;
          const Index rc = (part == 0 ? L.r_re(i) : L.r_im(i)) + j;
          if (pc.alpha != 0.0) t.emplace_back(row, zc, pc.alpha);
          if (pc.beta != 0.0) t.emplace_back(row, wc, pc.beta);
          t.emplace_back(row, rc, -1.0);
          ++row;
        }
  SparseMat C(rows, nvars);
  C.setFromTriplets(t.begin(), t.end());
  socp.add_inequalities(C, RealVec::Zero(rows));

  // sum_i w_ij = z_j
  t.clear();
  for (Index j = 0; j < 2 * n; ++j) {
    const bool re = j < n;
    const Index jj = re ? j : j - n;
    t.emplace_back(j, j, -1.0);
    for (std::size_t i = 0; i < m; ++i) t.emplace_back(j, (re ? L.w_re(i) : L.w_im(i)) + jj, 1.0);
  }
  SparseMat E(2 * n, nvars);
  E.setFromTriplets(t.begin(), t.end());
  socp.add_equalities(E, RealVec::Zero(2 * n));

  for (Index i = 0; i < 2 * n; ++i) socp.nonneg_indices.push_back(i);
  if (config.nonneg_weights)
    for (std::size_t i = 0; i < m; ++i)
      for (Index j = 0; j < 2 * n; ++j) socp.nonneg_indices.push_back(L.w_re(i) + j);

  js.socp = std::move(socp);
  return js;
}

ComplexVec joint_decision(const JointSocp& js, const RealVec& x) {
  return decision_from(x, js.layout.n);
}

UpperCertificate check_upper_certificate(const JointSocp& js, const Problem3CP& problem,
                                         const AmbiguitySpec& spec, double p, CopulaParam theta,
                                         const RealVec& x, double tol) {
  const JointLayout& L = js.layout;
  if (x.size() != L.nvars) throw std::invalid_argument("check_upper_certificate: wrong solution length");
  UpperCertificate cert;
  const Index n = L.n;
  const RealVec zs = x.head(2 * n);
  const double zz = zs.squaredNorm();
  const RealVec wz = stack_conj(joint_decision(js, x));
  RealVec w(2 * (n + 1));
  w << wz.head(n), -1.0, wz.tail(n), 0.0;
  bool ok = zz > 0.0;
  for (std::size_t i = 0; i < L.m; ++i) {
    RealVec wi(2 * n);
    wi << x.segment(L.w_re(i), n), x.segment(L.w_im(i), n);
    const double yi = zz > 0.0 ? wi.dot(zs) / zz : 0.0;
    cert.y.push_back(yi);
    cert.weight_sum += yi;
    // Largest-index piece within 1e-9 of the maximum.
    std::size_t active = 0;
    const double top = max_of_pieces(js.pieces, yi);
    for (std::size_t l = 0; l < js.pieces.size(); ++l)
      if (js.pieces[l](yi) >= top - 1e-9) active = l;
    cert.active_piece.push_back(active);
    if (!(yi > 0.0 && yi <= 1.0)) {
      cert.row_slack.push_back(std::numeric_limits<double>::infinity());
      ok = false;
      continue;
    }
    const RowCounterpart rc = row_counterpart(spec, problem.rows[i], i, p);
    const double sigma = rc.F.rows() ? (rc.F * w).norm() : 0.0;
    const double extra = rc.H.rows() ? (rc.H * w).norm() : 0.0;
    const double mu = rc.mean.dot(w);
    const double slack = kp_y(spec, p, theta, yi) * sigma + extra + mu;
    cert.row_slack.push_back(slack);
    if (slack > tol * (1.0 + std::abs(mu))) ok = false;
  }
  if (std::abs(cert.weight_sum - 1.0) > 1e-6) ok = false;
  cert.holds = ok;
  return cert;
}

Problem3CP with_joint_levels(const Problem3CP& problem, double p, const std::vector<double>& y,
                             CopulaParam theta) {
  if (y.size() != problem.m()) throw std::invalid_argument("one weight per row is required");
  Problem3CP out = problem;
  out.levels = decompose_joint(p, y, theta);
  return out;
}

}  // namespace ccp3
