#include "spikelab/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "spikelab/detail/text.hpp"
#include "spikelab/errors.hpp"

namespace spikelab::io {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'L', 'M', 'A', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::string_view kCsvPrefix = "# spikelab ";

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    out.write(reinterpret_cast<const char*>(b), sizeof(T));
  } else {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <class T>
T get(std::istream& in) {
  T v;
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw ConfigError("truncated matrix file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

const std::map<std::string, Schema>& schemas() {
  using C = Column;
  constexpr auto num = ColumnType::number;
  constexpr auto opt = ColumnType::optional_number;
  constexpr auto txt = ColumnType::text;
  static const std::map<std::string, Schema> all = [&] {
    std::map<std::string, Schema> m;
    auto add = [&](Schema s) { m.emplace(s.name, std::move(s)); };
    add({"spectrum_histogram", {C{"stage", txt}, C{"bin_lo", num}, C{"bin_hi", num}, C{"count", num}}});
    add({"spectrum_top", {C{"stage", txt}, C{"rank", num}, C{"eigenvalue", num}, C{"bulk_edge", num}}});
    add({"phase",
         {C{"beta", num}, C{"gamma_pca", num}, C{"gamma_lower", opt}, C{"gamma_mle", opt},
          C{"verdict_at_requested_gamma", txt}}});
    add({"moment",
         {C{"lambda_or_beta", num}, C{"gamma", opt}, C{"n", num}, C{"trials", num}, C{"estimate", num},
          C{"std_error", num}, C{"diverged_count", num}, C{"top1pct_mass", num}, C{"exact", opt},
          C{"limit", opt}}});
    add({"rho_star", {C{"rho_star", num}, C{"tolerance", num}, C{"bracket_lo", num}, C{"bracket_hi", num}}});
    add({"thresholds", {C{"quantity", txt}, C{"value", num}}});
    return m;
  }();
  return all;
}

bool is_number(std::string_view s) {
  if (s == "nan" || s == "inf" || s == "-inf") return true;
  try {
    detail::parse_double(s, "number");
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

}  // namespace

std::string tool_version() { return SPIKELAB_VERSION; }

void write_binary(const SymmetricMatrixSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, sample.n);
  const std::string desc = sample.model.to_string();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(desc.size()));
  out.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  put<std::uint64_t>(out, sample.seed);
  const std::uint8_t flags = (sample.root_n_scaled ? 1 : 0) | (sample.spike ? 2 : 0);
  put<std::uint8_t>(out, flags);
  const auto n = static_cast<Eigen::Index>(sample.n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) put<double>(out, sample.entries(i, j));
  if (sample.spike)
    for (Eigen::Index i = 0; i < n; ++i) put<double>(out, (*sample.spike)(i));
  if (!out) throw NumericError("write to " + path.string() + " failed");
}

SymmetricMatrixSample read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ConfigError(path.string() + " is not a matrix file");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ConfigError("unsupported matrix file version " + std::to_string(version));
  SymmetricMatrixSample s;
  s.n = get<std::uint64_t>(in);
  const auto len = get<std::uint32_t>(in);
  std::string desc(len, '\0');
  in.read(desc.data(), len);
  if (!in) throw ConfigError("truncated matrix file");
  s.model = ModelDescriptor::parse(desc);
  s.seed = get<std::uint64_t>(in);
  const auto flags = get<std::uint8_t>(in);
  s.root_n_scaled = flags & 1;
  const auto n = static_cast<Eigen::Index>(s.n);
  s.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = get<double>(in);
      s.entries(i, j) = v;
      s.entries(j, i) = v;
    }
  if (flags & 2) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = get<double>(in);
    s.spike = std::move(x);
  }
  return s;
}

void write_matrix_csv(const SymmetricMatrixSample& sample, std::ostream& out) {
  const auto n = sample.entries.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_number(sample.entries(i, j));
    }
    out << '\n';
  }
}

const Schema& csv_schema(const std::string& name) {
  const auto& all = schemas();
  const auto it = all.find(name);
  if (it == all.end()) throw ConfigError("unknown schema '" + name + "'");
  return it->second;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_double(v);
}

CsvWriter::CsvWriter(std::ostream& out, const Schema& schema, const nlohmann::json& config)
    : out_(out), schema_(schema) {
  const nlohmann::json head = {{"schema", schema.name}, {"version", tool_version()}, {"config", config}};
  out_ << kCsvPrefix << head.dump() << '\n';
  for (std::size_t i = 0; i < schema.columns.size(); ++i) out_ << (i ? "," : "") << schema.columns[i].name;
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& values) {
  if (values.size() != schema_.columns.size()) throw ConfigError("row width does not match schema " + schema_.name);
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
  out_ << '\n';
}

JsonlWriter::JsonlWriter(std::ostream& out, const std::string& schema, const nlohmann::json& config)
    : out_(out) {
  out_ << nlohmann::json{{"schema", schema}, {"version", tool_version()}, {"config", config}}.dump() << '\n';
}

void JsonlWriter::record(const nlohmann::json& object) { out_ << object.dump() << '\n'; }

void JsonlWriter::summary(const nlohmann::json& object) {
  out_ << nlohmann::json{{"summary", object}}.dump() << '\n';
}

namespace {

void check_header(const nlohmann::json& head, ValidationResult& r) {
  if (!head.is_object() || !head.contains("schema") || !head["schema"].is_string()) {
    r.errors.push_back("header lacks a schema name");
    return;
  }
  r.schema = head["schema"];
  if (!head.contains("version") || !head["version"].is_string()) r.errors.push_back("header lacks the tool version");
  if (!head.contains("config") || !head["config"].is_object()) r.errors.push_back("header lacks the config object");
}

void validate_csv(std::istream& in, const std::string& first, ValidationResult& r) {
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(first.substr(kCsvPrefix.size()));
  } catch (const nlohmann::json::exception& e) {
    r.errors.push_back(std::string("unparseable header: ") + e.what());
    return;
  }
  check_header(head, r);
  if (!r.errors.empty()) return;
  const Schema* schema = nullptr;
  try {
    schema = &csv_schema(r.schema);
  } catch (const ConfigError& e) {
    r.errors.push_back(e.what());
    return;
  }
  std::string line;
  if (!std::getline(in, line)) {
    r.errors.push_back("missing column line");
    return;
  }
  std::string expected;
  for (std::size_t i = 0; i < schema->columns.size(); ++i) expected += (i ? "," : "") + schema->columns[i].name;
  if (line != expected) r.errors.push_back("columns '" + line + "' do not match '" + expected + "'");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != schema->columns.size()) {
      r.errors.push_back("line " + std::to_string(lineno) + ": expected " + std::to_string(schema->columns.size()) +
                         " fields, found " + std::to_string(fields.size()));
      continue;
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto type = schema->columns[i].type;
      const bool good = type == ColumnType::text || (type == ColumnType::optional_number && fields[i].empty()) ||
                        is_number(fields[i]);
      if (!good) {
        r.errors.push_back("line " + std::to_string(lineno) + ": column " + schema->columns[i].name +
                           " is not numeric: '" + std::string(fields[i]) + "'");
      }
    }
    ++r.records;
  }
}

void validate_jsonl(std::istream& in, const std::string& first, ValidationResult& r) {
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception& e) {
    r.errors.push_back(std::string("unparseable header: ") + e.what());
    return;
  }
  check_header(head, r);
  if (!r.errors.empty()) return;
  if (r.schema != "detect") {
    r.errors.push_back("unknown JSON-lines schema '" + r.schema + "'");
    return;
  }
  static const std::vector<std::pair<std::string, nlohmann::json::value_t>> fields = {
      {"detector", nlohmann::json::value_t::string}, {"params", nlohmann::json::value_t::object},
      {"seed", nlohmann::json::value_t::number_unsigned}, {"statistic", nlohmann::json::value_t::number_float},
      {"threshold", nlohmann::json::value_t::number_float}, {"decision", nlohmann::json::value_t::string}};
  std::string line;
  std::size_t lineno = 1;
  bool summary_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      r.errors.push_back(where + "not JSON");
      continue;
    }
    if (summary_seen) r.errors.push_back(where + "record after the summary");
    if (obj.contains("summary")) {
      summary_seen = true;
      const auto& s = obj["summary"];
      for (const char* key : {"trials_spiked", "trials_unspiked", "type1", "type2", "total_error"}) {
        if (!s.contains(key)) r.errors.push_back(where + "summary lacks " + key);
      }
      continue;
    }
    for (const auto& [key, type] : fields) {
      if (!obj.contains(key)) {
        r.errors.push_back(where + "missing " + key);
        continue;
      }
      const auto& v = obj[key];
      const bool good = type == nlohmann::json::value_t::number_float ? v.is_number()
                        : type == nlohmann::json::value_t::number_unsigned ? v.is_number_unsigned()
                                                                             : v.type() == type;
      if (!good) r.errors.push_back(where + key + " has the wrong type");
    }
    if (obj.contains("decision") && obj["decision"] != "spiked" && obj["decision"] != "unspiked") {
      r.errors.push_back(where + "decision must be spiked or unspiked");
    }
    for (const char* key : {"correlation", "wall_ms"}) {
      if (!obj.contains(key) || !(obj[key].is_null() || obj[key].is_number())) {
        r.errors.push_back(where + key + " must be a number or null");
      }
    }
    ++r.records;
  }
  if (!summary_seen) r.errors.push_back("missing summary line");
}

}  // namespace

ValidationResult validate(std::istream& in) {
  ValidationResult r;
  std::string first;
  if (!std::getline(in, first)) {
    r.ok = false;
    r.errors.push_back("empty file");
    return r;
  }
  if (first.starts_with(kCsvPrefix)) {
    validate_csv(in, first, r);
  } else if (first.starts_with("{")) {
    validate_jsonl(in, first, r);
  } else {
    r.errors.push_back("unrecognised header line");
  }
  r.ok = r.errors.empty();
  return r;
}

ValidationResult validate_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return validate(in);
}

}  // namespace spikelab::io
