#include "ccp3/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ccp3/joint_copula.hpp"

namespace ccp3 {

namespace fs = std::filesystem;

std::string command_name(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Validate: return "validate";
    case Command::ExperimentTable: return "experiment-table";
    case Command::ExperimentGap: return "experiment-gap";
    case Command::ExperimentEstimation: return "experiment-estimation";
    case Command::Beamform: return "beamform";
  }
  return "unknown";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::Solve, Command::Validate, Command::ExperimentTable, Command::ExperimentGap,
                    Command::ExperimentEstimation, Command::Beamform})
    if (command_name(c) == name) return c;
  return std::nullopt;
}

namespace {

const Json kEmpty = Json::object();

const Json& section(const Json& doc, const std::string& key) {
  if (!doc.contains(key)) return kEmpty;
  const Json& s = doc.at(key);
  if (!s.is_object()) throw SchemaError("$." + key, "expected an object");
  return s;
}

std::vector<std::size_t> get_sizes(const Json& obj, const std::string& key, const std::string& path,
                                   const std::vector<std::size_t>& fallback) {
  if (!obj.contains(key)) return fallback;
  std::vector<std::size_t> out;
  const std::string p = path + "." + key;
  if (!obj.at(key).is_array()) throw SchemaError(p, "expected an array");
  for (std::size_t i = 0; i < obj.at(key).size(); ++i) {
    const Json& v = obj.at(key)[i];
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw SchemaError(p + "[" + std::to_string(i) + "]", "expected a positive integer");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::vector<long long> get_counts(const Json& obj, const std::string& key, const std::string& path,
                                  const std::vector<long long>& fallback) {
  std::vector<long long> out;
  for (std::size_t v : get_sizes(obj, key, path, {})) out.push_back(static_cast<long long>(v));
  return obj.contains(key) ? out : fallback;
}

double solver_tol(const Json& doc) { return get_double(doc, "tol", "$", 1e-8); }
std::string solver_backend(const Json& doc) { return get_string(doc, "backend", "$", "reference"); }

struct Loaded {
  Json doc;  // effective config: overrides applied, problem inlined
  fs::path base_dir;
  std::string hash;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

Loaded load_config(const RunConfig& cfg) {
  if (!fs::exists(cfg.config_path)) throw std::runtime_error("config file not found: " + cfg.config_path.string());
  Loaded l;
  l.doc = read_json_file(cfg.config_path);
  if (!l.doc.is_object()) throw SchemaError("$", "config must be an object");
  l.base_dir = cfg.config_path.parent_path();
  if (cfg.seed) l.doc["seed"] = *cfg.seed;
  if (cfg.tol) l.doc["tol"] = *cfg.tol;
  if (cfg.backend) l.doc["backend"] = *cfg.backend;
  if (l.doc.contains("seed")) {
    l.seed = get_u64(l.doc, "seed", "$", 0);
    l.has_seed = true;
  }
  if (l.doc.contains("problem") && l.doc.at("problem").is_string()) {
    fs::path p = l.doc.at("problem").get<std::string>();
    if (p.is_relative()) p = l.base_dir / p;
    if (!fs::exists(p)) throw SchemaError("$.problem", "file not found: " + p.string());
    l.doc["problem"] = read_json_file(p);
  }
  l.hash = hex64(fnv1a64(command_name(cfg.command) + "\n" + l.doc.dump()));
  return l;
}

std::uint64_t require_seed(const Loaded& l) {
  if (!l.has_seed) throw SchemaError("$.seed", "this command needs an explicit seed (config or --seed)");
  return l.seed;
}

std::vector<std::string> stamp(const RunConfig& cfg, const Loaded& l, std::vector<std::string> extra = {}) {
  std::vector<std::string> out{"command=" + command_name(cfg.command), "config_hash=" + l.hash};
  if (l.has_seed) out.push_back("seed=" + std::to_string(l.seed));
  for (auto& e : extra) out.push_back(std::move(e));
  return out;
}

Problem3CP problem_of(const Loaded& l) { return problem_from_json(require_field(l.doc, "problem", "$"), "$.problem"); }

AmbiguitySpec spec_of(const Loaded& l, const Problem3CP& problem) {
  AmbiguitySpec spec = spec_from_json(require_field(l.doc, "spec", "$"), "$.spec", l.base_dir);
  try {
    validate_spec(spec, problem);
  } catch (const std::invalid_argument& e) {
    throw SchemaError("$.spec", e.what());
  }
  return spec;
}

struct SolveOutcome {
  std::string mode;
  SocpSolution sol;
  ComplexVec z;
  Residuals res;
  std::optional<UpperCertificate> certificate;
};

SolveOutcome solve_from(const Loaded& l, const Problem3CP& problem, const AmbiguitySpec& spec) {
  const Json& s = section(l.doc, "solve");
  SolveOutcome out;
  out.mode = get_string(s, "mode", "$.solve", "individual");
  SolverOptions opts;
  opts.tol = solver_tol(l.doc);
  opts.backend = solver_backend(l.doc);
  if (out.mode == "individual") {
    const SocpProblem socp = reformulate_problem(problem, spec);
    out.sol = solve(socp, opts);
    out.res = residuals(socp, out.sol);
    if (out.sol.status == SolveStatus::Optimal) out.z = decision_from(out.sol.x, problem.n);
    return out;
  }
  if (out.mode != "joint_lower" && out.mode != "joint_upper")
    throw SchemaError("$.solve.mode", "expected individual, joint_lower or joint_upper");
  JointApproxConfig jc;
  jc.theta = {get_double(s, "theta", "$.solve", 2.0)};
  jc.points = geometric_points(static_cast<std::size_t>(get_int(s, "tangent_count", "$.solve", 20)),
                               get_double(s, "tangent_lo", "$.solve", 1e-3));
  jc.mode = out.mode == "joint_lower" ? BoundMode::Lower : BoundMode::Upper;
  jc.nonneg_weights = get_bool(s, "nonneg_weights", "$.solve", false);
  const double p = require_double(s, "p", "$.solve");
  const JointSocp js = build_joint_socp(problem, spec, p, jc);
  out.sol = solve(js.socp, opts);
  out.res = residuals(js.socp, out.sol);
  if (out.sol.status == SolveStatus::Optimal) {
    out.z = joint_decision(js, out.sol.x);
    if (jc.mode == BoundMode::Upper) out.certificate = check_upper_certificate(js, problem, spec, p, jc.theta, out.sol.x);
  }
  return out;
}

Json solution_json(const SolveOutcome& o, const AmbiguitySpec& spec, const std::string& hash) {
  Json j;
  j["config_hash"] = hash;
  j["mode"] = o.mode;
  j["spec"] = spec_name(spec);
  j["status"] = to_string(o.sol.status);
  j["objective"] = o.sol.objective_value;
  j["iterations"] = o.sol.iterations;
  j["residuals"] = {{"primal", o.res.primal}, {"dual", o.res.dual}, {"gap", o.res.gap}};
  if (o.z.size() > 0) j["z"] = to_json(o.z);
  if (o.certificate) {
    j["upper_certificate"] = {{"holds", o.certificate->holds},
                              {"weight_sum", o.certificate->weight_sum},
                              {"y", o.certificate->y}};
  }
  return j;
}

void finite_or_null(Json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) j = nullptr;
  if (j.is_structured())
    for (auto& v : j) finite_or_null(v);
}

// Artifacts are staged in memory and written only after the command finished.
using Artifacts = std::vector<std::pair<fs::path, std::string>>;

Artifacts cmd_solve(const RunConfig& cfg, const Loaded& l) {
  const Problem3CP problem = problem_of(l);
  const AmbiguitySpec spec = spec_of(l, problem);
  const SolveOutcome o = solve_from(l, problem, spec);
  Json j = solution_json(o, spec, l.hash);
  finite_or_null(j);
  return {{cfg.out_dir / "solution.json", dump_json(j)}};
}

Artifacts cmd_validate(const RunConfig& cfg, const Loaded& l) {
  const std::uint64_t seed = require_seed(l);
  const Problem3CP problem = problem_of(l);
  const Json& v = section(l.doc, "validate");
  ComplexVec z;
  Json sol_json;
  if (v.contains("decision")) {
    z = complex_vec_from_json(v.at("decision"), "$.validate.decision");
    if (z.size() != problem.n) throw SchemaError("$.validate.decision", "length differs from n");
  } else {
    const AmbiguitySpec spec = spec_of(l, problem);
    const SolveOutcome o = solve_from(l, problem, spec);
    sol_json = solution_json(o, spec, l.hash);
    if (o.sol.status != SolveStatus::Optimal)
      throw std::runtime_error("cannot validate: solve returned " + to_string(o.sol.status));
    z = o.z;
  }
  ScenarioGenerator gen =
      generator_for(problem, v.contains("family") ? family_from_json(v.at("family"), "$.validate.family") : Gaussian{});
  if (v.contains("deviation_bound")) {
    gen.deviation_bound = real_vec_from_json(v.at("deviation_bound"), "$.validate.deviation_bound");
    if (gen.deviation_bound->size() != problem.n + 1)
      throw SchemaError("$.validate.deviation_bound", "expected n + 1 entries");
  }
  const long long S = get_int(v, "scenarios", "$.validate", 1000);
  if (S < 1) throw SchemaError("$.validate.scenarios", "must be positive");
  const ValidationReport rep = oos_violation(z, gen, S, seed);
  CsvWriter csv(stamp(cfg, l, {"scenarios=" + std::to_string(S)}), {"row", "level", "violation_rate", "halfwidth"});
  for (std::size_t i = 0; i < rep.per_constraint_rates.size(); ++i)
    csv.add_row({std::to_string(i), csv_field(problem.levels[i]), csv_field(rep.per_constraint_rates[i]),
                 csv_field(binomial_halfwidth(rep.per_constraint_rates[i], S))});
  Json j;
  j["config_hash"] = l.hash;
  j["seed"] = seed;
  j["scenarios"] = S;
  j["joint_violation_rate"] = rep.joint_violation_rate;
  j["joint_halfwidth"] = rep.binomial_halfwidth;
  j["mean_per_constraint_rate"] = rep.mean_per_constraint_rate;
  j["max_per_constraint_rate"] = rep.max_per_constraint_rate;
  j["per_constraint_rates"] = rep.per_constraint_rates;
  if (!sol_json.is_null()) j["solution"] = sol_json;
  finite_or_null(j);
  return {{cfg.out_dir / "validation.json", dump_json(j)}, {cfg.out_dir / "validation.csv", csv.str()}};
}

Artifacts cmd_table(const RunConfig& cfg, const Loaded& l) {
  const ExperimentConfig ec = table_config_from_json(l.doc, require_seed(l));
  const TableResult r = run_table_experiment(ec);
  auto comments = stamp(cfg, l, {"instance_seed=" + std::to_string(ec.instance.seed),
                                 "scenario_seed=" + std::to_string(ec.scenario_seed),
                                 "scenarios=" + std::to_string(ec.scenarios)});
  return {{cfg.out_dir / "table.csv", table_csv(r, comments).str()},
          {cfg.out_dir / "trends.csv", trends_csv(r, comments).str()}};
}

Artifacts cmd_gap(const RunConfig& cfg, const Loaded& l) {
  const GapConfig gc = gap_config_from_json(l.doc, require_seed(l));
  const auto rows = run_gap_experiment(gc);
  auto comments = stamp(cfg, l, {"instance_seed=" + std::to_string(gc.instance.seed)});
  return {{cfg.out_dir / "gap.csv", gap_csv(rows, comments).str()}};
}

Artifacts cmd_estimation(const RunConfig& cfg, const Loaded& l) {
  const EstimationConfig ec = estimation_config_from_json(l.doc, require_seed(l));
  const auto rows = run_estimation_experiment(ec);
  auto comments = stamp(cfg, l, {"instance_seed=" + std::to_string(ec.instance.seed),
                                 "sample_seed=" + std::to_string(ec.sample_seed)});
  return {{cfg.out_dir / "estimation.csv", estimation_csv(rows, comments).str()}};
}

Artifacts cmd_beamform(const RunConfig& cfg, const Loaded& l) {
  const SweepConfig sc = sweep_config_from_json(l.doc, require_seed(l));
  const auto rows = snr_sweep(sc);
  auto comments = stamp(cfg, l, {"sweep_seed=" + std::to_string(sc.seed), "trials=" + std::to_string(sc.trials)});
  return {{cfg.out_dir / "sinr.csv", sweep_csv(rows, comments).str()}};
}

Json error_report(const RunConfig& cfg, const std::string& kind, const std::string& message,
                  const std::string& path = {}) {
  Json e = {{"command", command_name(cfg.command)}, {"kind", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  return {{"error", e}};
}

}  // namespace

InstanceConfig instance_config_from_json(const Json& j, const std::string& path) {
  InstanceConfig ic;
  if (j.is_null()) return ic;
  ic.n = static_cast<Eigen::Index>(get_int(j, "n", path, ic.n));
  ic.m = static_cast<std::size_t>(get_int(j, "m", path, static_cast<long long>(ic.m)));
  ic.seed = get_u64(j, "seed", path, ic.seed);
  ic.b_mean_lo = get_double(j, "b_mean_lo", path, ic.b_mean_lo);
  ic.b_mean_hi = get_double(j, "b_mean_hi", path, ic.b_mean_hi);
  ic.b_std_lo = get_double(j, "b_std_lo", path, ic.b_std_lo);
  ic.b_std_hi = get_double(j, "b_std_hi", path, ic.b_std_hi);
  ic.pcov_scale = get_double(j, "pcov_scale", path, ic.pcov_scale);
  ic.sign_constraints = get_bool(j, "sign_constraints", path, ic.sign_constraints);
  ic.level = get_double(j, "level", path, ic.level);
  if (ic.n < 1 || ic.m < 1) throw SchemaError(path, "n and m must be positive");
  if (!(ic.b_mean_lo <= ic.b_mean_hi) || !(ic.b_std_lo <= ic.b_std_hi) || ic.b_std_lo < 0.0)
    throw SchemaError(path, "inconsistent b ranges");
  return ic;
}

namespace {

InstanceConfig instance_with_seed(const Json& s, const std::string& path, InstanceConfig defaults,
                                  std::uint64_t seed) {
  Json merged = s.contains("instance") ? s.at("instance") : Json::object();
  if (!merged.is_object()) throw SchemaError(path + ".instance", "expected an object");
  const Json d = {{"n", defaults.n}, {"m", defaults.m}};
  for (auto it = d.begin(); it != d.end(); ++it)
    if (!merged.contains(it.key())) merged[it.key()] = it.value();
  if (!merged.contains("seed")) merged["seed"] = seed;
  return instance_config_from_json(merged, path + ".instance");
}

}  // namespace

ExperimentConfig table_config_from_json(const Json& doc, std::uint64_t seed) {
  const Json& s = section(doc, "table");
  const std::string path = "$.table";
  ExperimentConfig ec;
  ec.instance = instance_with_seed(s, path, ec.instance, seed);
  ec.levels = get_doubles(s, "levels", path, ec.levels);
  ec.theta = get_double(s, "theta", path, ec.theta);
  ec.scenarios = get_int(s, "scenarios", path, ec.scenarios);
  ec.scenario_seed = get_u64(s, "scenario_seed", path, ec.scenario_seed);
  ec.tangent_count = static_cast<std::size_t>(get_int(s, "tangent_count", path, 20));
  ec.tangent_lo = get_double(s, "tangent_lo", path, ec.tangent_lo);
  ec.run_joint = get_bool(s, "run_joint", path, ec.run_joint);
  ec.tol = solver_tol(doc);
  ec.backend = solver_backend(doc);
  if (s.contains("specs")) {
    const std::string sp = path + ".specs";
    if (!s.at("specs").is_array()) throw SchemaError(sp, "expected an array");
    for (std::size_t i = 0; i < s.at("specs").size(); ++i) {
      const Json& t = s.at("specs")[i];
      const std::string tp = sp + "[" + std::to_string(i) + "]";
      TableSpec ts;
      ts.spec = spec_from_json(require_field(t, "spec", tp), tp + ".spec");
      ts.label = get_string(t, "label", tp, spec_name(ts.spec));
      if (t.contains("scenario_family")) ts.scenario_family = family_from_json(t.at("scenario_family"), tp + ".scenario_family");
      else if (const auto* ck = std::get_if<CesKnown>(&ts.spec)) ts.scenario_family = ck->family;
      ts.norm_bound = get_double(t, "norm_bound", tp, ts.norm_bound);
      ts.estimation_samples = get_int(t, "estimation_samples", tp, ts.estimation_samples);
      ts.delta = get_double(t, "delta", tp, ts.delta);
      ec.specs.push_back(std::move(ts));
    }
  }
  for (double p : ec.levels)
    if (!(p > 0.0 && p < 1.0)) throw SchemaError(path + ".levels", "levels must lie in (0, 1)");
  if (ec.scenarios < 100) throw SchemaError(path + ".scenarios", "at least 100 scenarios");
  return ec;
}

GapConfig gap_config_from_json(const Json& doc, std::uint64_t seed) {
  const Json& s = section(doc, "gap");
  const std::string path = "$.gap";
  GapConfig gc;
  gc.instance = instance_with_seed(s, path, gc.instance, seed);
  gc.p = get_double(s, "p", path, gc.p);
  gc.theta = get_double(s, "theta", path, gc.theta);
  if (s.contains("spec")) gc.spec = spec_from_json(s.at("spec"), path + ".spec");
  gc.tangent_counts = get_sizes(s, "tangent_counts", path, gc.tangent_counts);
  gc.tangent_lo = get_double(s, "tangent_lo", path, gc.tangent_lo);
  gc.nonneg_weights = get_bool(s, "nonneg_weights", path, gc.nonneg_weights);
  gc.tol = solver_tol(doc);
  gc.backend = solver_backend(doc);
  return gc;
}

EstimationConfig estimation_config_from_json(const Json& doc, std::uint64_t seed) {
  const Json& s = section(doc, "estimation");
  const std::string path = "$.estimation";
  EstimationConfig ec;
  ec.instance = instance_with_seed(s, path, ec.instance, seed);
  ec.p = get_double(s, "p", path, ec.p);
  ec.sample_sizes = get_counts(s, "sample_sizes", path, ec.sample_sizes);
  ec.delta = get_double(s, "delta", path, ec.delta);
  if (s.contains("support_radius")) ec.support_radius = require_double(s, "support_radius", path);
  ec.sample_seed = get_u64(s, "sample_seed", path, seed);
  ec.tol = solver_tol(doc);
  ec.backend = solver_backend(doc);
  return ec;
}

SweepConfig sweep_config_from_json(const Json& doc, std::uint64_t seed) {
  const Json& s = section(doc, "beamform");
  const std::string path = "$.beamform";
  SweepConfig sc;
  if (s.contains("array")) {
    const Json& a = s.at("array");
    const std::string ap = path + ".array";
    sc.model.M = static_cast<Eigen::Index>(get_int(a, "M", ap, sc.model.M));
    sc.model.spacing = get_double(a, "spacing", ap, sc.model.spacing);
    sc.model.signal_doa = get_double(a, "signal_doa", ap, sc.model.signal_doa);
    sc.model.interferer_doas = get_doubles(a, "interferer_doas", ap, sc.model.interferer_doas);
    sc.model.interferer_inr_db = get_doubles(a, "interferer_inr_db", ap, sc.model.interferer_inr_db);
    sc.model.noise_power = get_double(a, "noise_power", ap, sc.model.noise_power);
    try {
      sc.model.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError(ap, e.what());
    }
  }
  sc.p = get_double(s, "p", path, sc.p);
  sc.mismatch_power = get_double(s, "mismatch_power", path, sc.mismatch_power);
  sc.snr_db = get_doubles(s, "snr_db", path, sc.snr_db);
  sc.trials = static_cast<int>(get_int(s, "trials", path, sc.trials));
  sc.estimation_samples = get_counts(s, "estimation_samples", path, sc.estimation_samples);
  sc.delta = get_double(s, "delta", path, sc.delta);
  sc.include_snapshot = get_bool(s, "include_snapshot", path, sc.include_snapshot);
  sc.snapshots = static_cast<Eigen::Index>(get_int(s, "snapshots", path, sc.snapshots));
  const std::string scale = get_string(s, "scale", path, "exact");
  if (scale == "exact") sc.scale = MismatchScale::Exact;
  else if (scale == "halved") sc.scale = MismatchScale::Halved;
  else throw SchemaError(path + ".scale", "expected exact or halved");
  sc.seed = seed;
  sc.tol = get_double(doc, "tol", "$", 1e-9);
  sc.backend = solver_backend(doc);
  return sc;
}

CsvWriter table_csv(const TableResult& r, std::vector<std::string> comments) {
  CsvWriter csv(std::move(comments), {"spec", "semantics", "p", "mode", "status", "objective", "violation_mean",
                                      "violation_max", "violation_joint", "halfwidth", "guarantee_checked",
                                      "guarantee_ok", "heavy_tailed"});
  for (const auto& row : r.rows)
    csv.add_row({row.spec, "\"" + row.semantics + "\"", csv_field(row.p), row.mode, "\"" + row.status + "\"",
                 csv_field(row.objective), csv_field(row.violation_mean), csv_field(row.violation_max),
                 csv_field(row.violation_joint), csv_field(row.halfwidth), csv_field(row.guarantee_checked),
                 csv_field(row.guarantee_ok), csv_field(row.heavy_tailed)});
  return csv;
}

CsvWriter trends_csv(const TableResult& r, std::vector<std::string> comments) {
  CsvWriter csv(std::move(comments), {"spec", "mode", "objective_monotone", "violation_monotone"});
  for (const auto& t : r.trends)
    csv.add_row({t.spec, t.mode, csv_field(t.objective_monotone), csv_field(t.violation_monotone)});
  return csv;
}

CsvWriter gap_csv(const std::vector<GapRow>& rows, std::vector<std::string> comments) {
  CsvWriter csv(std::move(comments), {"tangent_count", "lb_status", "ub_status", "lb", "ub", "gap", "ub_certificate"});
  for (const auto& g : rows)
    csv.add_row({std::to_string(g.tangent_count), g.lb_status, g.ub_status, csv_field(g.lb), csv_field(g.ub),
                 csv_field(g.gap), csv_field(g.ub_certificate)});
  return csv;
}

CsvWriter estimation_csv(const std::vector<EstimationRow>& rows, std::vector<std::string> comments) {
  CsvWriter csv(std::move(comments),
                {"samples", "objective_true", "status_empirical", "objective_empirical", "status_data_driven",
                 "objective_data_driven", "rel_error_empirical", "r1", "r2", "below_min_n", "support_estimated",
                 "conservative"});
  for (const auto& e : rows)
    csv.add_row({csv_field(e.samples), csv_field(e.objective_true), e.status_empirical,
                 csv_field(e.objective_empirical), e.status_data_driven, csv_field(e.objective_data_driven),
                 csv_field(e.rel_error_empirical), csv_field(e.r1), csv_field(e.r2), csv_field(e.below_min_n),
                 csv_field(e.support_estimated), csv_field(e.conservative)});
  return csv;
}

CsvWriter sweep_csv(const std::vector<SweepRow>& rows, std::vector<std::string> comments) {
  CsvWriter csv(std::move(comments),
                {"covariance", "mode", "samples", "snr_db", "sinr_db", "trials", "failures"});
  for (const auto& s : rows)
    csv.add_row({s.covariance, s.mode, csv_field(s.samples), csv_field(s.snr_db), csv_field(s.sinr_db),
                 std::to_string(s.trials), std::to_string(s.failures)});
  return csv;
}

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    const Loaded l = load_config(cfg);
    Artifacts out;
    switch (cfg.command) {
      case Command::Solve: out = cmd_solve(cfg, l); break;
      case Command::Validate: out = cmd_validate(cfg, l); break;
      case Command::ExperimentTable: out = cmd_table(cfg, l); break;
      case Command::ExperimentGap: out = cmd_gap(cfg, l); break;
      case Command::ExperimentEstimation: out = cmd_estimation(cfg, l); break;
      case Command::Beamform: out = cmd_beamform(cfg, l); break;
    }
    for (const auto& [path, text] : out) {
      write_text_file(path, text);
      log << path.string() << "\n";
    }
    return kExitOk;
  } catch (const SchemaError& e) {
    err << error_report(cfg, "schema", e.what(), e.path()).dump() << "\n";
  } catch (const std::invalid_argument& e) {
    err << error_report(cfg, "invalid_argument", e.what()).dump() << "\n";
  } catch (const std::exception& e) {
    err << error_report(cfg, "runtime", e.what()).dump() << "\n";
  }
  return kExitError;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex chance-constrained programs: reformulation, solving and experiments", "ccp3"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config, out_dir = "out", backend;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::vector<std::pair<CLI::App*, Command>> subs;
  const std::vector<std::pair<Command, std::string>> commands{
      {Command::Solve, "Reformulate and solve one problem"},
      {Command::Validate, "Solve (or take a decision) and measure out-of-sample violation"},
      {Command::ExperimentTable, "Violation table across uncertainty models and levels"},
      {Command::ExperimentGap, "Lower/upper joint approximation gap versus tangent count"},
      {Command::ExperimentEstimation, "Effect of moment estimation on the optimal value"},
      {Command::Beamform, "Robust MVDR SINR sweep"}};
  CLI::Option* seed_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* backend_opt = nullptr;
  std::vector<CLI::Option*> seed_opts, tol_opts, backend_opts;
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(command_name(cmd), help);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    seed_opts.push_back(sub->add_option("--seed", seed, "Seed (overrides the config)"));
    tol_opts.push_back(sub->add_option("--tol", tol, "Solver tolerance"));
    backend_opts.push_back(sub->add_option("--backend", backend, "Solver backend"));
    subs.emplace_back(sub, cmd);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) {
      err << app.help();
      return kExitUsage;
    }
    return kExitOk;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].first->parsed()) continue;
    cfg.command = subs[i].second;
    seed_opt = seed_opts[i];
    tol_opt = tol_opts[i];
    backend_opt = backend_opts[i];
  }
  cfg.config_path = config;
  cfg.out_dir = out_dir;
  if (seed_opt && seed_opt->count()) cfg.seed = seed;
  if (tol_opt && tol_opt->count()) cfg.tol = tol;
  if (backend_opt && backend_opt->count()) cfg.backend = backend;
  return run(cfg, out, err);
}

}  // namespace ccp3
