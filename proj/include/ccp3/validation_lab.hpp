#pragma once

// Out-of-sample violation measurement and the experiment pipelines: the
// violation table, the joint gap study and the estimation study.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccp3/ambiguity_reform.hpp"
#include "ccp3/ces_distributions.hpp"
#include "ccp3/joint_copula.hpp"
#include "ccp3/socp_solver.hpp"

namespace ccp3 {

/// 1.96 sqrt(r (1 - r) / S)
double binomial_halfwidth(double rate, long long scenarios);

struct ValidationReport {
  double joint_violation_rate = 0.0;
  std::vector<double> per_constraint_rates;
  double mean_per_constraint_rate = 0.0;
  double max_per_constraint_rate = 0.0;
  long long scenario_count = 0;
  double binomial_halfwidth = 0.0;  // of the joint rate
  std::uint64_t seed = 0;
};

/// Law of the rows d_i = [a_i, b_i] (dimension n+1 each, rows independent).
struct ScenarioGenerator {
  CesFamily family = Gaussian{};
  std::vector<MomentTriple> rows;
  /// Optional |d_k - mu_k| <= bound_k, enforced by rejection.
  std::optional<RealVec> deviation_bound;
};

ScenarioGenerator generator_for(const Problem3CP& problem, const CesFamily& family);

ValidationReport oos_violation(const ComplexVec& z, const ScenarioGenerator& gen, long long scenarios,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Instances

struct InstanceConfig {
  Eigen::Index n = 50;
  std::size_t m = 15;
  std::uint64_t seed = 1;
  double b_mean_lo = 30.0;
  double b_mean_hi = 40.0;
  double b_std_lo = 0.5;
  double b_std_hi = 1.0;
  double pcov_scale = 0.5;
  bool sign_constraints = true;
  double level = 0.9;
};

/// Means uniform on the unit disk, covariances G G^H scaled to unit average
/// diagonal, pseudo-covariances pcov_scale G G^T with the same scaling, and
/// c = -sum_i lambda_i conj(mu_{a_i}) which keeps the problem bounded.
Problem3CP generate_instance(const InstanceConfig& cfg);

// ---------------------------------------------------------------------------
// Violation table

/// One column of the table: the uncertainty model used for the
/// reformulation and the law the scenarios are drawn from.
struct TableSpec {
  std::string label;
  AmbiguitySpec spec = MomentExact{};
  CesFamily scenario_family = Gaussian{};
  double norm_bound = 10.0;          // NormSupport: l_k for every k
  long long estimation_samples = 100000;  // DataDriven
  double delta = 0.05;               // DataDriven
};

/// The default eight specs plus Cauchy.
std::vector<TableSpec> default_table_specs();

struct ExperimentConfig {
  InstanceConfig instance;
  std::vector<double> levels{0.7, 0.8, 0.95};
  double theta = 2.0;
  std::vector<TableSpec> specs;
  long long scenarios = 1000;
  std::uint64_t scenario_seed = 7;
  std::size_t tangent_count = 20;
  double tangent_lo = 1e-3;
  bool run_joint = true;
  double tol = 1e-8;
  std::string backend = "reference";
};

struct TableRow {
  std::string spec;
  std::string semantics;
  double p = 0.0;
  std::string mode;  // "individual" or "joint_lb"
  std::string status;
  double objective = 0.0;
  double violation_mean = 0.0;   // mean per-constraint rate
  double violation_max = 0.0;    // worst per-constraint rate
  double violation_joint = 0.0;  // any row violated
  double halfwidth = 0.0;        // of the rate the mode is judged on
  bool guarantee_checked = false;
  bool guarantee_ok = false;
  bool heavy_tailed = false;
};

struct TableResult {
  std::vector<TableRow> rows;
  /// One line per (spec, mode): objective non-decreasing and violation
  /// non-increasing in p.
  struct Trend {
    std::string spec;
    std::string mode;
    bool objective_monotone = false;
    bool violation_monotone = false;
  };
  std::vector<Trend> trends;
};

/// Judged rate: worst per-constraint rate for individual mode, joint rate
/// for joint mode. Guarantee: rate <= (1 - p) + 2 halfwidth, and strictly
/// below 1 - p for the distributionally robust specs. Heavy-tailed specs are
/// reported but not checked.
TableResult run_table_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Gap between the lower and upper joint approximations

struct GapConfig {
  InstanceConfig instance{10, 5, 3};
  double p = 0.95;
  double theta = 2.0;
  AmbiguitySpec spec = MomentExact{};
  std::vector<std::size_t> tangent_counts{5, 10, 20, 40};
  double tangent_lo = 1e-3;
  bool nonneg_weights = false;
  double tol = 1e-8;
  std::string backend = "reference";
};

struct GapRow {
  std::size_t tangent_count = 0;
  std::string lb_status;
  std::string ub_status;
  double lb = 0.0;
  double ub = 0.0;
  double gap = 0.0;  // (UB - LB) / |UB|
  bool ub_certificate = false;
};

std::vector<GapRow> run_gap_experiment(const GapConfig& cfg);

// ---------------------------------------------------------------------------
// Effect of estimation error

struct EstimationConfig {
  InstanceConfig instance{10, 5, 5};
  double p = 0.9;
  std::vector<long long> sample_sizes{100, 1000, 10000, 100000};
  double delta = 0.05;
  std::optional<double> support_radius;  // default: sample maximum
  std::uint64_t sample_seed = 11;
  double tol = 1e-8;
  std::string backend = "reference";
};

struct EstimationRow {
  long long samples = 0;
  double objective_true = 0.0;
  std::string status_empirical;
  double objective_empirical = 0.0;  // estimated moments, no radii
  std::string status_data_driven;
  double objective_data_driven = 0.0;  // estimated moments with radii
  double rel_error_empirical = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  bool below_min_n = false;
  bool support_estimated = false;
  bool conservative = false;  // objective_data_driven >= objective_true
};

std::vector<EstimationRow> run_estimation_experiment(const EstimationConfig& cfg);

}  // namespace ccp3
