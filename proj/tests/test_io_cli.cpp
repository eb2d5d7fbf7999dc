#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "ccp3/cli.hpp"
#include "ccp3/io.hpp"
#include "ccp3/validation_lab.hpp"

using namespace ccp3;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("ccp3_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kMinimalProblem = R"({
  "n": 1,
  "c": [[-1, 0]],
  "sign_constraints": true,
  "rows": [
    {"a": {"mean": [[2, 0]], "cov": [[[1, 0]]]}, "b_mean": 3, "b_var": 0.25, "level": 0.9}
  ]
})";

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::vector<const char*> argv{"ccp3"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Hash, Fnv1a) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(ProblemIo, MinimalFileRoundTripsByteIdentically) {
  TempDir tmp;
  const Problem3CP p = problem_from_json(parse_json(kMinimalProblem, "inline"));
  EXPECT_EQ(p.n, 1);
  EXPECT_EQ(p.rows[0].b_var, 0.25);
  save_problem(tmp.path() / "a.json", p);
  const Problem3CP q = load_problem(tmp.path() / "a.json");
  save_problem(tmp.path() / "b.json", q);
  EXPECT_EQ(slurp(tmp.path() / "a.json"), slurp(tmp.path() / "b.json"));
}

TEST(ProblemIo, GeneratedInstanceRoundTripsAndLoadsFast) {
  TempDir tmp;
  const Problem3CP p = generate_instance(InstanceConfig{});
  save_problem(tmp.path() / "big.json", p);
  const auto t0 = std::chrono::steady_clock::now();
  const Problem3CP q = load_problem(tmp.path() / "big.json");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  EXPECT_EQ(q.c, p.c);
  for (std::size_t i = 0; i < p.m(); ++i) {
    EXPECT_EQ(q.rows[i].a.cov, p.rows[i].a.cov);
    EXPECT_EQ(q.rows[i].a.pcov, p.rows[i].a.pcov);
    EXPECT_EQ(q.rows[i].b_var, p.rows[i].b_var);
  }
  save_problem(tmp.path() / "again.json", q);
  EXPECT_EQ(slurp(tmp.path() / "big.json"), slurp(tmp.path() / "again.json"));
}

TEST(ProblemIo, NonHermitianCovarianceNamesTheEntry) {
  const std::string bad = R"({"n": 2, "c": [[1, 0], [0, 0]], "rows": [{"a": {"mean": [[0, 0], [0, 0]],
      "cov": [[[1, 0], [0.5, 0]], [[0.4, 0], [1, 0]]]}, "b_mean": 1, "level": 0.9}]})";
  try {
    problem_from_json(parse_json(bad, "inline"));
    FAIL() << "accepted a non-Hermitian covariance";
  } catch (const SchemaError& e) {
    EXPECT_NE(e.path().find("$.rows[0].a"), std::string::npos) << e.path();
    const std::string what = e.what();
    EXPECT_TRUE(what.find("cov(0,1)") != std::string::npos || what.find("cov(1,0)") != std::string::npos) << what;
  }
}

TEST(ProblemIo, SchemaErrorsCarryPaths) {
  try {
    problem_from_json(parse_json(R"({"n": 1, "c": [[1, 0]], "rows": [{"a": {"mean": [1]}, "level": 0.9}]})", "x"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path().rfind("$.rows[0]", 0), 0u) << e.path();
  }
  EXPECT_THROW(parse_json("{\"n\": ", "broken"), SchemaError);
}

TEST(SpecIo, EveryVariantRoundTrips) {
  const std::vector<AmbiguitySpec> specs{
      CesKnown{StudentT{4.0}},
      CesKnown{Cauchy{}},
      CesKnown{GeneralizedGaussian{0.5, 1.0}},
      MomentExact{},
      MomentSymmetric{},
      CovBounded{{RealMat::Identity(4, 4)}},
      MomentsEllipsoid{0.2, {MomentTriple::proper(ComplexVec::Zero(2), ComplexMat::Identity(2, 2))}},
      NormSupport{RealVec::Constant(2, 10.0)},
      DataDriven{{{MomentTriple::proper(ComplexVec::Zero(2), ComplexMat::Identity(2, 2)), 0.1, 0.2}}},
  };
  for (const auto& s : specs) {
    const Json j = to_json(s);
    const AmbiguitySpec back = spec_from_json(j, "$");
    EXPECT_EQ(spec_name(back), spec_name(s));
    EXPECT_EQ(dump_json(to_json(back)), dump_json(j));
  }
  EXPECT_THROW(spec_from_json(parse_json(R"({"type": "bogus"})", "x"), "$"), SchemaError);
}

TEST(Csv, LayoutAndRowLength) {
  CsvWriter w({"command=test"}, {"a", "b"});
  w.add_row({csv_field(0.5), csv_field(true)});
  EXPECT_EQ(w.str(), "# command=test\na,b\n0.5,1\n");
  EXPECT_THROW(w.add_row({"1"}), std::invalid_argument);
}

TEST(Cli, UnknownCommandIsUsageError) {
  std::string err;
  EXPECT_EQ(run_cli({"frobnicate", "--config", "x.json"}, &err), kExitUsage);
  EXPECT_NE(err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({"solve"}), kExitUsage);
  EXPECT_EQ(run_cli({}), kExitUsage);
}

TEST(Cli, SolveWritesOptimalSolution) {
  TempDir tmp;
  spit(tmp.path() / "problem.json", kMinimalProblem);
  spit(tmp.path() / "config.json", R"({"problem": "problem.json", "spec": {"type": "moment_exact"}})");
  const fs::path out = tmp.path() / "out";
  ASSERT_EQ(run_cli({"solve", "--config", (tmp.path() / "config.json").string(), "--out", out.string()}), kExitOk);
  const Json sol = read_json_file(out / "solution.json");
  EXPECT_EQ(sol.at("status"), "optimal");
  // max Re z s.t. 2 Re z + 3 sqrt(0.5 |z|^2 + 0.25) <= 3 at level 0.9, MomentExact factor 3.
  const double x = sol.at("z")[0][0].get<double>();
  EXPECT_NEAR(2 * x + 3 * std::sqrt(0.5 * x * x + 0.25), 3.0, 1e-6);
  EXPECT_LE(sol.at("residuals").at("gap").get<double>(), 1e-8);
}

TEST(Cli, ErrorsAreReportedAsJson) {
  TempDir tmp;
  spit(tmp.path() / "config.json", R"({"problem": {"n": 1, "c": [[1, 0]], "rows": []}, "spec": {"type": "nope"}})");
  std::string err;
  const fs::path out = tmp.path() / "out";
  EXPECT_EQ(run_cli({"solve", "--config", (tmp.path() / "config.json").string(), "--out", out.string()}, &err),
            kExitError);
  const Json e = parse_json(err, "stderr");
  EXPECT_EQ(e.at("error").at("kind"), "schema");
  EXPECT_EQ(e.at("error").at("path"), "$.spec.type");
  EXPECT_FALSE(fs::exists(out / "solution.json"));
  EXPECT_EQ(run_cli({"solve", "--config", (tmp.path() / "missing.json").string()}, &err), kExitError);
}

TEST(Cli, ExperimentsNeedASeed) {
  TempDir tmp;
  spit(tmp.path() / "gap.json", R"({"gap": {"instance": {"n": 3, "m": 2}, "tangent_counts": [5]}})");
  std::string err;
  EXPECT_EQ(run_cli({"experiment-gap", "--config", (tmp.path() / "gap.json").string(), "--out",
                     (tmp.path() / "o").string()},
                    &err),
            kExitError);
  EXPECT_NE(err.find("$.seed"), std::string::npos);
}

TEST(Cli, GapRunIsDeterministicAndStamped) {
  TempDir tmp;
  spit(tmp.path() / "gap.json", R"({"seed": 3, "gap": {"instance": {"n": 3, "m": 2}, "tangent_counts": [5, 10]}})");
  const std::string cfg = (tmp.path() / "gap.json").string();
  ASSERT_EQ(run_cli({"experiment-gap", "--config", cfg, "--out", (tmp.path() / "a").string()}), kExitOk);
  ASSERT_EQ(run_cli({"experiment-gap", "--config", cfg, "--out", (tmp.path() / "b").string()}), kExitOk);
  const std::string a = slurp(tmp.path() / "a" / "gap.csv");
  EXPECT_EQ(a, slurp(tmp.path() / "b" / "gap.csv"));
  EXPECT_NE(a.find("# command=experiment-gap"), std::string::npos);
  EXPECT_NE(a.find("# config_hash="), std::string::npos);
  EXPECT_NE(a.find("# seed=3"), std::string::npos);
  EXPECT_NE(a.find("tangent_count,lb_status,ub_status,lb,ub,gap,ub_certificate"), std::string::npos);
  ASSERT_EQ(run_cli({"experiment-gap", "--config", cfg, "--seed", "4", "--out", (tmp.path() / "c").string()}),
            kExitOk);
  EXPECT_NE(a, slurp(tmp.path() / "c" / "gap.csv"));
}

TEST(Cli, ValidateReportsRates) {
  TempDir tmp;
  spit(tmp.path() / "problem.json", kMinimalProblem);
  spit(tmp.path() / "config.json",
       R"({"seed": 5, "problem": "problem.json", "spec": {"type": "ces_known", "family": {"name": "gaussian"}},
           "validate": {"scenarios": 20000}})");
  ASSERT_EQ(run_cli({"validate", "--config", (tmp.path() / "config.json").string(), "--out",
                     (tmp.path() / "o").string()}),
            kExitOk);
  const Json v = read_json_file(tmp.path() / "o" / "validation.json");
  // Gaussian row active at the optimum: the rate sits at 1 - p.
  EXPECT_NEAR(v.at("per_constraint_rates")[0].get<double>(), 0.1, 1.96 * std::sqrt(0.09 / 20000) * 1.5);
  EXPECT_TRUE(fs::exists(tmp.path() / "o" / "validation.csv"));
}
