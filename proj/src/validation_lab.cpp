#include "ccp3/validation_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "ccp3/estimation.hpp"

namespace ccp3 {

using Index = Eigen::Index;

double binomial_halfwidth(double rate, long long scenarios) {
  if (scenarios <= 0) throw std::invalid_argument("binomial_halfwidth: scenario count must be positive");
  return 1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(scenarios));
}

ScenarioGenerator generator_for(const Problem3CP& problem, const CesFamily& family) {
  ScenarioGenerator gen;
  gen.family = family;
  for (const auto& row : problem.rows) gen.rows.push_back(row.stacked());
  return gen;
}

namespace {

constexpr Index kBatch = 4096;

// count draws of one row, rejection-sampled against the deviation bound.
ComplexMat draw_row(const CesSampler& sampler, Index count, std::mt19937_64& rng,
                    const std::optional<RealVec>& bound) {
  if (!bound) return sampler.draw(count, rng);
  const ComplexVec& mu = sampler.moments().mean;
  if (bound->size() != mu.size()) throw std::invalid_argument("deviation bound has wrong length");
  ComplexMat out(mu.size(), count);
  Index filled = 0;
  long long attempts = 0;
  while (filled < count) {
    const ComplexMat batch = sampler.draw(std::min<Index>(kBatch, 2 * (count - filled) + 16), rng);
    for (Index c = 0; c < batch.cols() && filled < count; ++c) {
      if (((batch.col(c) - mu).cwiseAbs().array() <= bound->array()).all()) out.col(filled++) = batch.col(c);
    }
    attempts += batch.cols();
    if (attempts > 1000 * (count + 100))
      throw std::runtime_error("deviation bound rejects almost every draw");
  }
  return out;
}

bool is_heavy_tailed(const AmbiguitySpec& spec, const CesFamily& scenario_family) {
  if (const auto* ces = std::get_if<CesKnown>(&spec))
    if (!has_finite_variance(ces->family)) return true;
  return !has_finite_variance(scenario_family);
}

bool is_distributionally_robust(const AmbiguitySpec& spec) { return !std::holds_alternative<CesKnown>(spec); }

}  // namespace

ValidationReport oos_violation(const ComplexVec& z, const ScenarioGenerator& gen, long long scenarios,
                               std::uint64_t seed) {
  if (scenarios < 1) throw std::invalid_argument("scenario count must be positive");
  if (!z.allFinite()) throw std::invalid_argument("decision is not finite");
  const Index n = z.size();
  ComplexVec zt(n + 1);
  zt.head(n) = z;
  zt(n) = -1.0;
  ValidationReport rep;
  rep.scenario_count = scenarios;
  rep.seed = seed;
  std::vector<char> any(static_cast<std::size_t>(scenarios), 0);
  const SeededStream base{seed, 0};
  for (std::size_t i = 0; i < gen.rows.size(); ++i) {
    if (gen.rows[i].dim() != n + 1)
      throw std::invalid_argument("scenario row " + std::to_string(i) + " does not match the decision");
    const CesSampler sampler(gen.family, gen.rows[i]);
    auto rng = base.substream(i).engine();
    long long violated = 0;
    for (long long start = 0; start < scenarios; start += kBatch) {
      const Index count = static_cast<Index>(std::min<long long>(kBatch, scenarios - start));
      const ComplexMat d = draw_row(sampler, count, rng, gen.deviation_bound);
      const RealVec value = (d.transpose() * zt).real();
      for (Index s = 0; s < count; ++s)
        if (value(s) > 0.0) {
          ++violated;
          any[static_cast<std::size_t>(start + s)] = 1;
        }
    }
    rep.per_constraint_rates.push_back(static_cast<double>(violated) / static_cast<double>(scenarios));
  }
  long long joint = 0;
  for (char c : any) joint += c;
  rep.joint_violation_rate = static_cast<double>(joint) / static_cast<double>(scenarios);
  if (!rep.per_constraint_rates.empty()) {
    double sum = 0.0;
    for (double r : rep.per_constraint_rates) sum += r;
    rep.mean_per_constraint_rate = sum / static_cast<double>(rep.per_constraint_rates.size());
    rep.max_per_constraint_rate = *std::max_element(rep.per_constraint_rates.begin(), rep.per_constraint_rates.end());
  }
  rep.binomial_halfwidth = binomial_halfwidth(rep.joint_violation_rate, scenarios);
  return rep;
}

Problem3CP generate_instance(const InstanceConfig& cfg) {
  if (cfg.n <= 0 || cfg.m == 0) throw std::invalid_argument("instance dimensions must be positive");
  auto rng = SeededStream{cfg.seed, 0}.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = cfg.n;
  Problem3CP prob;
  prob.n = n;
  prob.sign_constraints = cfg.sign_constraints;
  for (std::size_t i = 0; i < cfg.m; ++i) {
    ConstraintRow row;
    row.a.mean.resize(n);
    for (Index k = 0; k < n; ++k) {
      const double r = std::sqrt(unif(rng));
      const double phi = 2.0 * std::numbers::pi * unif(rng);
      row.a.mean(k) = std::polar(r, phi);
    }
    ComplexMat G(n, n);
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < n; ++r) {
        const double re = normal(rng);
        const double im = normal(rng);
        G(r, c) = Complex(re, im) / std::numbers::sqrt2;
      }
    const ComplexMat cov = G * G.adjoint();
    const double scale = static_cast<double>(n) / cov.trace().real();
    row.a.cov = scale * cov;
    row.a.cov = 0.5 * (row.a.cov + row.a.cov.adjoint()).eval();
    row.a.pcov = (cfg.pcov_scale * scale) * (G * G.transpose());
    row.a.pcov = 0.5 * (row.a.pcov + row.a.pcov.transpose()).eval();
    row.b_mean = cfg.b_mean_lo + (cfg.b_mean_hi - cfg.b_mean_lo) * unif(rng);
    const double sd = cfg.b_std_lo + (cfg.b_std_hi - cfg.b_std_lo) * unif(rng);
    row.b_var = sd * sd;
    prob.rows.push_back(std::move(row));
  }
  prob.c = ComplexVec::Zero(n);
  for (const auto& row : prob.rows) {
    const double lambda = (0.5 + unif(rng)) / static_cast<double>(cfg.m);
    prob.c -= lambda * row.a.mean.conjugate();
  }
  prob.levels.assign(cfg.m, cfg.level);
  return prob;
}

std::vector<TableSpec> default_table_specs() {
  std::vector<TableSpec> out;
  out.push_back({"gaussian", CesKnown{Gaussian{}}, Gaussian{}});
  out.push_back({"student_t(4)", CesKnown{StudentT{4.0}}, StudentT{4.0}});
  out.push_back({"laplace", CesKnown{Laplace{}}, Laplace{}});
  out.push_back({"logistic", CesKnown{Logistic{}}, Logistic{}});
  out.push_back({"cauchy", CesKnown{Cauchy{}}, Cauchy{}});
  out.push_back({"moment_symmetric", MomentSymmetric{}, Gaussian{}});
  out.push_back({"moment_exact", MomentExact{}, Gaussian{}});
  out.push_back({"norm_support", NormSupport{}, Gaussian{}});
  out.push_back({"data_driven", DataDriven{}, Gaussian{}});
  return out;
}

namespace {

// Fills in parameters that depend on the instance (norm bounds, estimates).
AmbiguitySpec materialize(const TableSpec& ts, const Problem3CP& prob, std::uint64_t seed,
                          ScenarioGenerator& gen) {
  if (std::holds_alternative<NormSupport>(ts.spec)) {
    NormSupport ns{RealVec::Constant(prob.n + 1, ts.norm_bound)};
    gen.deviation_bound = ns.l;
    return ns;
  }
  if (const auto* dd = std::get_if<DataDriven>(&ts.spec); dd && dd->rows.empty()) {
    DataDriven out;
    const SeededStream base{seed, 1};
    for (std::size_t i = 0; i < prob.m(); ++i) {
      const CesSampler sampler(ts.scenario_family, prob.rows[i].stacked());
      auto rng = base.substream(i).engine();
      MomentAccumulator acc(prob.n + 1);
      for (long long done = 0; done < ts.estimation_samples; done += kBatch)
        acc.add(sampler.draw(static_cast<Index>(std::min<long long>(kBatch, ts.estimation_samples - done)), rng));
      out.rows.push_back(to_data_driven_row(attach_radii(acc.moments(), acc.max_norm(), acc.count(), ts.delta)));
    }
    return out;
  }
  return ts.spec;
}

SolverOptions solver_options(double tol, const std::string& backend) {
  SolverOptions o;
  o.tol = tol;
  o.backend = backend;
  return o;
}

}  // namespace

TableResult run_table_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenarios < 100) throw std::invalid_argument("at least 100 scenarios are required");
  TableResult result;
  Problem3CP prob = generate_instance(cfg.instance);
  const auto opts = solver_options(cfg.tol, cfg.backend);
  const std::vector<TableSpec> specs = cfg.specs.empty() ? default_table_specs() : cfg.specs;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const TableSpec& ts = specs[si];
    ScenarioGenerator gen = generator_for(prob, ts.scenario_family);
    const AmbiguitySpec spec = materialize(ts, prob, cfg.instance.seed ^ 0x9e3779b97f4a7c15ULL, gen);
    const bool heavy = is_heavy_tailed(spec, ts.scenario_family);
    for (double p : cfg.levels) {
      std::fill(prob.levels.begin(), prob.levels.end(), p);
      auto record = [&](const std::string& mode, const SocpSolution& sol, const ComplexVec* z) {
        TableRow row;
        row.spec = ts.label;
        row.semantics = spec_semantics(spec);
        row.p = p;
        row.mode = mode;
        row.status = to_string(sol.status);
        row.objective = sol.objective_value;
        row.heavy_tailed = heavy;
        if (z) {
          const auto rep = oos_violation(*z, gen, cfg.scenarios, cfg.scenario_seed);
          row.violation_mean = rep.mean_per_constraint_rate;
          row.violation_max = rep.max_per_constraint_rate;
          row.violation_joint = rep.joint_violation_rate;
          const bool individual = mode == "individual";
          const double judged = individual ? rep.max_per_constraint_rate : rep.joint_violation_rate;
          row.halfwidth = binomial_halfwidth(judged, cfg.scenarios);
          const double target = 1.0 - p;
          row.guarantee_ok = judged <= target + 2.0 * row.halfwidth &&
                             (!is_distributionally_robust(spec) || judged < target);
          row.guarantee_checked = individual && !heavy;
        }
        result.rows.push_back(row);
      };
      try {
        const SocpProblem socp = reformulate_problem(prob, spec);
        const SocpSolution sol = solve(socp, opts);
        if (sol.status == SolveStatus::Optimal) {
          const ComplexVec z = decision_from(sol.x, prob.n);
          record("individual", sol, &z);
        } else {
          record("individual", sol, nullptr);
        }
      } catch (const std::exception& e) {
        SocpSolution failed;
        record("individual", failed, nullptr);
        result.rows.back().status = std::string("error: ") + e.what();
      }
      if (!cfg.run_joint) continue;
      try {
        JointApproxConfig jc;
        jc.theta = {cfg.theta};
        jc.points = geometric_points(cfg.tangent_count, cfg.tangent_lo);
        jc.mode = BoundMode::Lower;
        const JointSocp js = build_joint_socp(prob, spec, p, jc);
        const SocpSolution sol = solve(js.socp, opts);
        if (sol.status == SolveStatus::Optimal) {
          const ComplexVec z = joint_decision(js, sol.x);
          record("joint_lb", sol, &z);
        } else {
          record("joint_lb", sol, nullptr);
        }
      } catch (const std::exception& e) {
        SocpSolution failed;
        record("joint_lb", failed, nullptr);
        result.rows.back().status = std::string("error: ") + e.what();
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<const TableRow*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : result.rows) {
    auto key = std::make_pair(r.spec, r.mode);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    auto rows = groups[key];
    std::stable_sort(rows.begin(), rows.end(), [](const TableRow* a, const TableRow* b) { return a->p < b->p; });
    TableResult::Trend t{key.first, key.second, true, true};
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const TableRow& a = *rows[k - 1];
      const TableRow& b = *rows[k];
      if (a.status != "optimal" || b.status != "optimal") {
        t.objective_monotone = t.violation_monotone = false;
        continue;
      }
      if (b.objective < a.objective - 1e-7 * (1.0 + std::abs(a.objective))) t.objective_monotone = false;
      const bool ind = key.second == "individual";
      const double va = ind ? a.violation_mean : a.violation_joint;
      const double vb = ind ? b.violation_mean : b.violation_joint;
      if (vb > va) t.violation_monotone = false;
    }
    result.trends.push_back(t);
  }
  return result;
}

std::vector<GapRow> run_gap_experiment(const GapConfig& cfg) {
  InstanceConfig ic = cfg.instance;
  ic.sign_constraints = true;
  const Problem3CP prob = generate_instance(ic);
  const auto opts = solver_options(cfg.tol, cfg.backend);
  std::vector<GapRow> out;
  for (std::size_t N : cfg.tangent_counts) {
    GapRow row;
    row.tangent_count = N;
    JointApproxConfig jc;
    jc.theta = {cfg.theta};
    jc.points = geometric_points(N, cfg.tangent_lo);
    jc.nonneg_weights = cfg.nonneg_weights;
    jc.mode = BoundMode::Lower;
    const JointSocp lb = build_joint_socp(prob, cfg.spec, cfg.p, jc);
    const SocpSolution lsol = solve(lb.socp, opts);
    jc.mode = BoundMode::Upper;
    const JointSocp ub = build_joint_socp(prob, cfg.spec, cfg.p, jc);
    const SocpSolution usol = solve(ub.socp, opts);
    row.lb_status = to_string(lsol.status);
    row.ub_status = to_string(usol.status);
    row.lb = lsol.objective_value;
    row.ub = usol.objective_value;
    row.gap = (row.ub - row.lb) / std::abs(row.ub);
    if (usol.status == SolveStatus::Optimal)
      row.ub_certificate = check_upper_certificate(ub, prob, cfg.spec, cfg.p, jc.theta, usol.x).holds;
    out.push_back(row);
  }
  return out;
}

std::vector<EstimationRow> run_estimation_experiment(const EstimationConfig& cfg) {
  InstanceConfig ic = cfg.instance;
  ic.level = cfg.p;
  const Problem3CP prob = generate_instance(ic);
  const auto opts = solver_options(cfg.tol, cfg.backend);
  const SocpSolution truth = solve(reformulate_problem(prob, MomentExact{}), opts);
  if (truth.status != SolveStatus::Optimal)
    throw std::runtime_error("estimation experiment: the true-moment problem did not solve (" +
                             to_string(truth.status) + ")");
  std::vector<EstimationRow> out;
  for (long long N : cfg.sample_sizes) {
    if (N < 1) throw std::invalid_argument("sample sizes must be positive");
    EstimationRow row;
    row.samples = N;
    row.objective_true = truth.objective_value;
    DataDriven empirical, robust;
    const SeededStream base{cfg.sample_seed, static_cast<std::uint64_t>(N)};
    for (std::size_t i = 0; i < prob.m(); ++i) {
      const CesSampler sampler(Gaussian{}, prob.rows[i].stacked());
      auto rng = base.substream(i).engine();
      MomentAccumulator acc(prob.n + 1);
      for (long long done = 0; done < N; done += kBatch)
        acc.add(sampler.draw(static_cast<Index>(std::min<long long>(kBatch, N - done)), rng));
      const EstimatedMoments est = attach_radii(acc.moments(), acc.max_norm(), acc.count(), cfg.delta, cfg.support_radius);
      row.r1 = std::max(row.r1, est.r1);
      row.r2 = std::max(row.r2, est.r2);
      row.below_min_n = row.below_min_n || est.below_min_n;
      row.support_estimated = est.support_estimated;
      empirical.rows.push_back({est.triple, 0.0, 0.0});
      robust.rows.push_back(to_data_driven_row(est));
    }
    const SocpSolution se = solve(reformulate_problem(prob, empirical), opts);
    const SocpSolution sr = solve(reformulate_problem(prob, robust), opts);
    row.status_empirical = to_string(se.status);
    row.objective_empirical = se.objective_value;
    row.status_data_driven = to_string(sr.status);
    row.objective_data_driven = sr.objective_value;
    row.rel_error_empirical = std::abs(se.objective_value - truth.objective_value) / std::abs(truth.objective_value);
    row.conservative = sr.status == SolveStatus::Optimal &&
                       sr.objective_value >= truth.objective_value - 1e-6 * (1.0 + std::abs(truth.objective_value));
    out.push_back(row);
  }
  return out;
}

}  // namespace ccp3
