#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikelab/ensembles.hpp"

namespace spikelab::io {

std::string tool_version();

// Binary matrix container. Header: 8-byte magic "SPKLMAT\0", u32 version, u64 n,
// u32 descriptor length + descriptor bytes, u64 seed, u8 flags (bit 0: entries
// are sqrt(n) Y, bit 1: spike follows). Payload: the upper triangle in row-major
// order as little-endian doubles, then the spike if present.
void write_binary(const SymmetricMatrixSample& sample, const std::filesystem::path& path);
SymmetricMatrixSample read_binary(const std::filesystem::path& path);

/// Full matrix as CSV, for small n.
void write_matrix_csv(const SymmetricMatrixSample& sample, std::ostream& out);

enum class ColumnType { number, optional_number, text };

struct Column {
  std::string name;
  ColumnType type = ColumnType::number;
};

struct Schema {
  std::string name;
  std::vector<Column> columns;
};

/// Known CSV schemas: spectrum_histogram, spectrum_top, phase, moment, rho_star, thresholds.
const Schema& csv_schema(const std::string& name);

/// CSV with a leading `# spikelab {"schema":..,"version":..,"config":..}` line.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const Schema& schema, const nlohmann::json& config);
  /// Values are written verbatim; numbers should come from format_number.
  void row(const std::vector<std::string>& values);

 private:
  std::ostream& out_;
  const Schema& schema_;
};

/// Shortest round-trip text for finite values; `nan`, `inf`, `-inf` otherwise.
std::string format_number(double v);

/// JSON-lines writer for detector runs: a header object, one object per trial,
/// then a summary object.
class JsonlWriter {
 public:
  JsonlWriter(std::ostream& out, const std::string& schema, const nlohmann::json& config);
  void record(const nlohmann::json& object);
  void summary(const nlohmann::json& object);

 private:
  std::ostream& out_;
};

struct ValidationResult {
  bool ok = true;
  std::string schema;
  std::size_t records = 0;
  std::vector<std::string> errors;
};

/// Validates a CSV or JSON-lines artifact against its declared schema.
ValidationResult validate(std::istream& in);
ValidationResult validate_file(const std::filesystem::path& path);

}  // namespace spikelab::io
