#pragma once

// JSON encoding of problems and uncertainty models, and the CSV writer used
// by every experiment command.
//
// Complex scalars are two-element arrays [re, im]; matrices are row-major
// nested arrays. Uncertainty models carry a "type" tag.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ccp3/ambiguity_reform.hpp"
#include "ccp3/ces_distributions.hpp"
#include "ccp3/complex_core.hpp"

namespace ccp3 {

using Json = nlohmann::json;

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf".
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

/// Raised for malformed documents. what() starts with the field path, e.g.
/// "$.rows[2].a.cov[0][1]: expected [re, im]".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& message);
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses JSON text; syntax errors are reported with line and column.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);

Json complex_to_json(Complex v);
Json to_json(const ComplexVec& v);
Json to_json(const ComplexMat& m);
Json to_json(const RealVec& v);
Json to_json(const RealMat& m);
Json to_json(const MomentTriple& m);
Json to_json(const CesFamily& f);
Json to_json(const AmbiguitySpec& s);
Json to_json(const Problem3CP& p);

Complex complex_from_json(const Json& j, const std::string& path);
ComplexVec complex_vec_from_json(const Json& j, const std::string& path);
ComplexMat complex_mat_from_json(const Json& j, const std::string& path);
RealVec real_vec_from_json(const Json& j, const std::string& path);
RealMat real_mat_from_json(const Json& j, const std::string& path);
/// "pcov" may be omitted (proper vector). The triple is validated.
MomentTriple triple_from_json(const Json& j, const std::string& path);
CesFamily family_from_json(const Json& j, const std::string& path);
/// Data-driven models may name sample files instead of estimates; relative
/// paths resolve against base_dir.
AmbiguitySpec spec_from_json(const Json& j, const std::string& path,
                             const std::filesystem::path& base_dir = {});
/// Fully validated problem.
Problem3CP problem_from_json(const Json& j, const std::string& path = "$");

/// Canonical text: two-space indent, sorted keys, trailing newline.
std::string dump_json(const Json& j);

Problem3CP load_problem(const std::filesystem::path& path);
void save_problem(const std::filesystem::path& path, const Problem3CP& p);

// Typed field access with path-carrying errors.
const Json& require_field(const Json& obj, const std::string& key, const std::string& path);
double get_double(const Json& obj, const std::string& key, const std::string& path, double fallback);
double require_double(const Json& obj, const std::string& key, const std::string& path);
long long get_int(const Json& obj, const std::string& key, const std::string& path, long long fallback);
std::uint64_t get_u64(const Json& obj, const std::string& key, const std::string& path, std::uint64_t fallback);
bool get_bool(const Json& obj, const std::string& key, const std::string& path, bool fallback);
std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback);
std::vector<double> get_doubles(const Json& obj, const std::string& key, const std::string& path,
                                const std::vector<double>& fallback);

/// '#'-prefixed comment lines, then a header row and data rows.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> comments, std::vector<std::string> columns);
  void add_row(std::vector<std::string> fields);
  [[nodiscard]] std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(double v);
std::string csv_field(long long v);
std::string csv_field(bool v);

/// Writes through a temporary file and renames, so a failed run never leaves
/// a truncated artifact.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ccp3
