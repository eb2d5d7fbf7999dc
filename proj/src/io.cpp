#include "ccp3/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ccp3/estimation.hpp"

namespace ccp3 {

namespace fs = std::filesystem;
using Index = Eigen::Index;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

SchemaError::SchemaError(const std::string& path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(path) {}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
  }
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_json(os.str(), path.string());
}

// ---------------------------------------------------------------------------
// Encoding

Json complex_to_json(Complex v) { return Json::array({v.real(), v.imag()}); }

Json to_json(const ComplexVec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

Json to_json(const ComplexMat& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const RealVec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const RealMat& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const MomentTriple& m) {
  Json out = {{"mean", to_json(m.mean)}, {"cov", to_json(m.cov)}};
  if (m.pcov.size() > 0 && !m.pcov.isZero(0.0)) out["pcov"] = to_json(m.pcov);
  return out;
}

Json to_json(const CesFamily& f) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian>) return {{"name", "gaussian"}};
        if constexpr (std::is_same_v<T, StudentT>) return {{"name", "student_t"}, {"nu", v.nu}};
        if constexpr (std::is_same_v<T, Laplace>) return {{"name", "laplace"}};
        if constexpr (std::is_same_v<T, Logistic>) return {{"name", "logistic"}};
        if constexpr (std::is_same_v<T, Cauchy>) return {{"name", "cauchy"}};
        if constexpr (std::is_same_v<T, GeneralizedGaussian>)
          return {{"name", "generalized_gaussian"}, {"s", v.s}, {"b", v.b}};
      },
      f);
}

Json to_json(const AmbiguitySpec& s) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CesKnown>) return {{"type", "ces_known"}, {"family", to_json(v.family)}};
        if constexpr (std::is_same_v<T, MomentExact>) return {{"type", "moment_exact"}};
        if constexpr (std::is_same_v<T, MomentSymmetric>) return {{"type", "moment_symmetric"}};
        if constexpr (std::is_same_v<T, CovBounded>) {
          Json b = Json::array();
          for (const auto& m : v.bounds) b.push_back(to_json(m));
          return {{"type", "cov_bounded"}, {"bounds", b}};
        }
        if constexpr (std::is_same_v<T, MomentsEllipsoid>) {
          Json out = {{"type", "moments_ellipsoid"}, {"zeta", v.zeta}};
          if (!v.nominal.empty()) {
            Json nom = Json::array();
            for (const auto& m : v.nominal) nom.push_back(to_json(m));
            out["nominal"] = nom;
          }
          return out;
        }
        if constexpr (std::is_same_v<T, NormSupport>) return {{"type", "norm_support"}, {"l", to_json(v.l)}};
        if constexpr (std::is_same_v<T, DataDriven>) {
          Json rows = Json::array();
          for (const auto& r : v.rows) rows.push_back({{"est", to_json(r.est)}, {"r1", r.r1}, {"r2", r.r2}});
          return {{"type", "data_driven"}, {"rows", rows}};
        }
      },
      s);
}

Json to_json(const Problem3CP& p) {
  Json out;
  out["n"] = p.n;
  if (p.random_objective) {
    out["random_objective"] = to_json(*p.random_objective);
    out["p0"] = p.p0;
  } else {
    out["c"] = to_json(p.c);
  }
  out["sign_constraints"] = p.sign_constraints;
  Json rows = Json::array();
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    rows.push_back({{"a", to_json(r.a)},
                    {"b_mean", r.b_mean},
                    {"b_var", r.b_var},
                    {"level", i < p.levels.size() ? p.levels[i] : 0.0}});
  }
  out["rows"] = rows;
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string at(const std::string& path, const std::string& key) { return path + "." + key; }

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

const Json& object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  return j;
}

}  // namespace

const Json& require_field(const Json& obj, const std::string& key, const std::string& path) {
  object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(at(path, key), "missing field");
  return *it;
}

double require_double(const Json& obj, const std::string& key, const std::string& path) {
  return number(require_field(obj, key, path), at(path, key));
}

double get_double(const Json& obj, const std::string& key, const std::string& path, double fallback) {
  object(obj, path);
  return obj.contains(key) ? number(obj.at(key), at(path, key)) : fallback;
}

long long get_int(const Json& obj, const std::string& key, const std::string& path, long long fallback) {
  object(obj, path);
  if (!obj.contains(key)) return fallback;
  const Json& j = obj.at(key);
  if (!j.is_number_integer()) throw SchemaError(at(path, key), "expected an integer");
  return j.get<long long>();
}

std::uint64_t get_u64(const Json& obj, const std::string& key, const std::string& path, std::uint64_t fallback) {
  object(obj, path);
  if (!obj.contains(key)) return fallback;
  const Json& j = obj.at(key);
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  throw SchemaError(at(path, key), "expected a nonnegative integer");
}

bool get_bool(const Json& obj, const std::string& key, const std::string& path, bool fallback) {
  object(obj, path);
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw SchemaError(at(path, key), "expected true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  object(obj, path);
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw SchemaError(at(path, key), "expected a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_doubles(const Json& obj, const std::string& key, const std::string& path,
                                const std::vector<double>& fallback) {
  object(obj, path);
  if (!obj.contains(key)) return fallback;
  const std::string p = at(path, key);
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& v : array(obj.at(key), p)) out.push_back(number(v, at(p, i++)));
  return out;
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [re, im]");
  return {number(j[0], at(path, 0)), number(j[1], at(path, 1))};
}

ComplexVec complex_vec_from_json(const Json& j, const std::string& path) {
  array(j, path);
  ComplexVec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i], at(path, i));
  return v;
}

ComplexMat complex_mat_from_json(const Json& j, const std::string& path) {
  array(j, path);
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? array(j[0], at(path, 0)).size() : 0;
  ComplexMat m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = at(path, r);
    if (array(j[r], rp).size() != cols) throw SchemaError(rp, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = complex_from_json(j[r][c], at(rp, c));
  }
  return m;
}

RealVec real_vec_from_json(const Json& j, const std::string& path) {
  array(j, path);
  RealVec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], at(path, i));
  return v;
}

RealMat real_mat_from_json(const Json& j, const std::string& path) {
  array(j, path);
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? array(j[0], at(path, 0)).size() : 0;
  RealMat m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = at(path, r);
    if (array(j[r], rp).size() != cols) throw SchemaError(rp, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = number(j[r][c], at(rp, c));
  }
  return m;
}

MomentTriple triple_from_json(const Json& j, const std::string& path) {
  object(j, path);
  MomentTriple m;
  m.mean = complex_vec_from_json(require_field(j, "mean", path), at(path, "mean"));
  m.cov = complex_mat_from_json(require_field(j, "cov", path), at(path, "cov"));
  const Index n = m.mean.size();
  if (j.contains("pcov")) {
    m.pcov = complex_mat_from_json(j.at("pcov"), at(path, "pcov"));
  } else {
    m.pcov = ComplexMat::Zero(n, n);
  }
  const auto diag = validate_moment_triple(m);
  if (!diag.ok()) throw SchemaError(path, *diag.problem);
  return m;
}

CesFamily family_from_json(const Json& j, const std::string& path) {
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    name = get_string(j, "name", path, "");
    if (name.empty()) throw SchemaError(at(path, "name"), "missing family name");
  }
  const Json empty = Json::object();
  const Json& o = j.is_object() ? j : empty;
  if (name == "gaussian") return Gaussian{};
  if (name == "student_t") {
    const double nu = get_double(o, "nu", path, 4.0);
    if (!(nu > 0.0)) throw SchemaError(at(path, "nu"), "degrees of freedom must be positive");
    return StudentT{nu};
  }
  if (name == "laplace") return Laplace{};
  if (name == "logistic") return Logistic{};
  if (name == "cauchy") return Cauchy{};
  if (name == "generalized_gaussian") {
    GeneralizedGaussian g{get_double(o, "s", path, 1.0), get_double(o, "b", path, 1.0)};
    if (!(g.s > 0.0 && g.b > 0.0)) throw SchemaError(path, "s and b must be positive");
    return g;
  }
  throw SchemaError(path, "unknown family '" + name + "'");
}

AmbiguitySpec spec_from_json(const Json& j, const std::string& path, const fs::path& base_dir) {
  const std::string type = get_string(j, "type", path, "");
  if (type.empty()) throw SchemaError(at(path, "type"), "missing type tag");
  if (type == "ces_known") {
    const Json fam = j.contains("family") ? j.at("family") : Json("gaussian");
    return CesKnown{family_from_json(fam, at(path, "family"))};
  }
  if (type == "moment_exact") return MomentExact{};
  if (type == "moment_symmetric") return MomentSymmetric{};
  if (type == "cov_bounded") {
    CovBounded s;
    const std::string bp = at(path, "bounds");
    std::size_t i = 0;
    for (const auto& b : array(require_field(j, "bounds", path), bp)) s.bounds.push_back(real_mat_from_json(b, at(bp, i++)));
    return s;
  }
  if (type == "moments_ellipsoid") {
    MomentsEllipsoid s;
    s.zeta = require_double(j, "zeta", path);
    if (j.contains("nominal")) {
      const std::string np = at(path, "nominal");
      std::size_t i = 0;
      for (const auto& t : array(j.at("nominal"), np)) s.nominal.push_back(triple_from_json(t, at(np, i++)));
    }
    return s;
  }
  if (type == "norm_support") return NormSupport{real_vec_from_json(require_field(j, "l", path), at(path, "l"))};
  if (type == "data_driven") {
    DataDriven s;
    if (j.contains("rows")) {
      const std::string rp = at(path, "rows");
      std::size_t i = 0;
      for (const auto& r : array(j.at("rows"), rp)) {
        const std::string p = at(rp, i++);
        s.rows.push_back({triple_from_json(require_field(r, "est", p), at(p, "est")), get_double(r, "r1", p, 0.0),
                          get_double(r, "r2", p, 0.0)});
      }
      return s;
    }
    if (j.contains("sample_files")) {
      const double delta = get_double(j, "delta", path, 0.05);
      std::optional<double> R;
      if (j.contains("support_radius")) R = require_double(j, "support_radius", path);
      const std::string fp = at(path, "sample_files");
      std::size_t i = 0;
      for (const auto& f : array(j.at("sample_files"), fp)) {
        const std::string p = at(fp, i++);
        if (!f.is_string()) throw SchemaError(p, "expected a file name");
        fs::path file = f.get<std::string>();
        if (file.is_relative()) file = base_dir / file;
        try {
          s.rows.push_back(to_data_driven_row(estimate_with_radii(load_samples(file.string()), delta, R)));
        } catch (const std::exception& e) {
          throw SchemaError(p, e.what());
        }
      }
      return s;
    }
    throw SchemaError(path, "data_driven needs \"rows\" or \"sample_files\"");
  }
  throw SchemaError(at(path, "type"), "unknown type '" + type + "'");
}

Problem3CP problem_from_json(const Json& j, const std::string& path) {
  object(j, path);
  Problem3CP p;
  const long long n = get_int(j, "n", path, -1);
  if (n <= 0) throw SchemaError(at(path, "n"), "missing or non-positive dimension");
  p.n = static_cast<Index>(n);
  if (j.contains("random_objective")) {
    p.random_objective = triple_from_json(j.at("random_objective"), at(path, "random_objective"));
    p.p0 = get_double(j, "p0", path, 0.5);
    p.c = ComplexVec::Zero(p.n);
  } else {
    p.c = complex_vec_from_json(require_field(j, "c", path), at(path, "c"));
    if (p.c.size() != p.n) throw SchemaError(at(path, "c"), "length differs from n");
  }
  p.sign_constraints = get_bool(j, "sign_constraints", path, false);
  const std::string rp = at(path, "rows");
  std::size_t i = 0;
  for (const auto& r : array(require_field(j, "rows", path), rp)) {
    const std::string rowp = at(rp, i++);
    ConstraintRow row;
    row.a = triple_from_json(require_field(r, "a", rowp), at(rowp, "a"));
    if (row.a.dim() != p.n) throw SchemaError(at(rowp, "a"), "dimension differs from n");
    row.b_mean = require_double(r, "b_mean", rowp);
    row.b_var = get_double(r, "b_var", rowp, 0.0);
    p.rows.push_back(std::move(row));
    p.levels.push_back(require_double(r, "level", rowp));
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return p;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Problem3CP load_problem(const fs::path& path) { return problem_from_json(read_json_file(path), "$"); }

void save_problem(const fs::path& path, const Problem3CP& p) {
  p.validate();
  write_text_file(path, dump_json(to_json(p)));
}

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(std::vector<std::string> comments, std::vector<std::string> columns)
    : comments_(std::move(comments)), columns_(std::move(columns)) {}

void CsvWriter::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_.size())
    throw std::invalid_argument("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(columns_.size()));
  rows_.push_back(std::move(fields));
}

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& c : comments_) out += "# " + c + "\n";
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvWriter::write(const fs::path& path) const { write_text_file(path, str()); }

std::string csv_field(double v) { return format_double(v); }
std::string csv_field(long long v) { return std::to_string(v); }
std::string csv_field(bool v) { return v ? "1" : "0"; }

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace ccp3
