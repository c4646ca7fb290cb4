#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"

using namespace spikelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spikelab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("binary container round-trips") {
  const auto s = sample_gwig(0.8, SpikePrior::rademacher(), 37, 99);
  const auto path = scratch("gwig.bin");
  io::write_binary(s, path);
  const auto r = io::read_binary(path);
  CHECK(r.n == 37);
  CHECK(r.seed == 99);
  CHECK(r.model.to_string() == s.model.to_string());
  CHECK(r.entries == s.entries);
  REQUIRE(r.spike);
  CHECK(*r.spike == *s.spike);
  CHECK_FALSE(r.root_n_scaled);

  const auto d = sample_wig_discrete_noise(0.0, {{-1, 0.5}, {1, 0.5}}, SpikePrior::rademacher(), 12, 3);
  io::write_binary(d, path);
  const auto rd = io::read_binary(path);
  CHECK(rd.root_n_scaled);
  CHECK(rd.entries == d.entries);
  CHECK(rd.model.spiked() == false);
}

TEST_CASE("binary reader rejects corrupt files") {
  const auto path = scratch("bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTAMAT!";
  }
  CHECK_THROWS_AS(io::read_binary(path), ConfigError);
  const auto s = sample_gwig(0.0, SpikePrior::spherical(), 10, 1);
  io::write_binary(s, path);
  fs::resize_file(path, fs::file_size(path) - 8);
  CHECK_THROWS_AS(io::read_binary(path), ConfigError);
  CHECK_THROWS_AS(io::read_binary(scratch("missing.bin")), ConfigError);
}

TEST_CASE("matrix CSV") {
  const auto s = sample_gwig(0.0, SpikePrior::spherical(), 3, 1);
  std::ostringstream out;
  io::write_matrix_csv(s, out);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("number formatting") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(std::nan("")) == "nan");
  CHECK(io::format_number(-INFINITY) == "-inf");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV writer output validates") {
  std::ostringstream out;
  io::CsvWriter w(out, io::csv_schema("phase"), {{"command", "phase"}});
  w.row({"-0.9", "0.81", "0.83", "1.0118", "open"});
  w.row({"0.5", "0.25", "0.25", "nan", "pca"});
  std::istringstream in(out.str());
  const auto v = io::validate(in);
  CHECK(v.ok);
  CHECK(v.schema == "phase");
  CHECK(v.records == 2);
  CHECK_THROWS_AS(w.row({"1"}), ConfigError);
  CHECK_THROWS_AS(io::csv_schema("nope"), ConfigError);
}

TEST_CASE("validator catches malformed CSV") {
  std::ostringstream out;
  io::CsvWriter w(out, io::csv_schema("rho_star"), nlohmann::json::object());
  w.row({"0.184", "0.0001", "0.18", "0.19"});
  const std::string good = out.str();

  std::istringstream bad_value(good + "abc,1,2,3\n");
  CHECK_FALSE(io::validate(bad_value).ok);
  std::istringstream short_row(good + "1,2\n");
  CHECK_FALSE(io::validate(short_row).ok);
  std::istringstream no_header("rho_star,tolerance,bracket_lo,bracket_hi\n0.1,0.1,0.1,0.1\n");
  CHECK_FALSE(io::validate(no_header).ok);
  std::string wrong_cols = good;
  wrong_cols.replace(wrong_cols.find("bracket_lo"), 10, "bracket_xx");
  std::istringstream renamed(wrong_cols);
  CHECK_FALSE(io::validate(renamed).ok);
}

TEST_CASE("JSON-lines writer and validator") {
  auto make = [](const nlohmann::json& rec, const nlohmann::json& sum) {
    std::ostringstream out;
    io::JsonlWriter w(out, "detect", {{"command", "detect"}});
    w.record(rec);
    w.summary(sum);
    return out.str();
  };
  const nlohmann::json rec = {{"detector", "pca"}, {"params", nlohmann::json::object()}, {"seed", 12u},
                              {"statistic", 2.3}, {"threshold", 2.1}, {"decision", "spiked"},
                              {"correlation", 0.4}, {"wall_ms", nullptr}, {"truth", "spiked"}};
  const nlohmann::json sum = {{"trials_spiked", 1}, {"trials_unspiked", 0}, {"type1", 0.0},
                              {"type2", 0.0}, {"total_error", 0.0}};
  {
    std::istringstream in(make(rec, sum));
    const auto v = io::validate(in);
    CHECK(v.ok);
    CHECK(v.records == 1);
  }
  {
    auto r = rec;
    r.erase("threshold");
    std::istringstream in(make(r, sum));
    CHECK_FALSE(io::validate(in).ok);
  }
  {
    auto r = rec;
    r["seed"] = -3;
    std::istringstream in(make(r, sum));
    CHECK_FALSE(io::validate(in).ok);
  }
  {
    auto r = rec;
    r["decision"] = "yes";
    std::istringstream in(make(r, sum));
    CHECK_FALSE(io::validate(in).ok);
  }
  {
    auto s = sum;
    s.erase("type2");
    std::istringstream in(make(rec, s));
    CHECK_FALSE(io::validate(in).ok);
  }
  {
    std::istringstream in(make(rec, sum) + "{not json\n");
    CHECK_FALSE(io::validate(in).ok);
  }
}

TEST_CASE("validate_file") {
  const auto path = scratch("thr.csv");
  {
    std::ofstream out(path);
    io::CsvWriter w(out, io::csv_schema("thresholds"), nlohmann::json::object());
    w.row({"pca_gamma", "0.25"});
  }
  CHECK(io::validate_file(path).ok);
  CHECK_THROWS_AS(io::validate_file(scratch("absent.csv")), ConfigError);
}
