#pragma once

// Command-line driver. Every command reads one JSON config, writes its
// artifacts under the output directory and stamps them with the config hash
// and the seeds that were used.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccp3/beamforming.hpp"
#include "ccp3/io.hpp"
#include "ccp3/validation_lab.hpp"

namespace ccp3 {

enum class Command { Solve, Validate, ExperimentTable, ExperimentGap, ExperimentEstimation, Beamform };

std::string command_name(Command c);
std::optional<Command> parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::Solve;
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> backend;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. Errors are reported on err as a single JSON object and
/// give kExitError; nothing is written to out_dir in that case.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Parses argv and dispatches; usage errors give kExitUsage.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Config sections, exposed for tests.
InstanceConfig instance_config_from_json(const Json& j, const std::string& path);
ExperimentConfig table_config_from_json(const Json& doc, std::uint64_t seed);
GapConfig gap_config_from_json(const Json& doc, std::uint64_t seed);
EstimationConfig estimation_config_from_json(const Json& doc, std::uint64_t seed);
SweepConfig sweep_config_from_json(const Json& doc, std::uint64_t seed);

// CSV layouts of the experiment results.
CsvWriter table_csv(const TableResult& r, std::vector<std::string> comments);
CsvWriter trends_csv(const TableResult& r, std::vector<std::string> comments);
CsvWriter gap_csv(const std::vector<GapRow>& rows, std::vector<std::string> comments);
CsvWriter estimation_csv(const std::vector<EstimationRow>& rows, std::vector<std::string> comments);
CsvWriter sweep_csv(const std::vector<SweepRow>& rows, std::vector<std::string> comments);

}  // namespace ccp3
