#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikelab/detect.hpp"
#include "spikelab/ensembles.hpp"
#include "spikelab/moments.hpp"
#include "spikelab/thresholds.hpp"

namespace spikelab {

/// Everything a subcommand needs. `lambdas`, `betas` and `ns` accept sweeps.
struct ExperimentConfig {
  std::string command;
  ModelKind model = ModelKind::gwig;
  std::string prior = "spherical";
  std::string noise = "gaussian";
  std::vector<double> lambdas{0.0};
  std::vector<double> betas{0.0};
  std::optional<double> gamma;
  std::vector<std::size_t> ns{200};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out;
  std::string format = "csv";
  std::string detector = "pca";
  std::string rate;
  bool timing = false;
  std::optional<double> margin;
  std::optional<double> epsilon;
  std::optional<double> atom;  ///< point-mass test atom c
  int bins = 60;
  int top_k = 5;
  double tolerance = 1e-4;
  double departure = 0.0;
  int grid = 10000;
  std::string gnuplot;

  nlohmann::json to_json() const;
  double gamma_or(double fallback) const { return gamma.value_or(fallback); }
};

/// Parses `a,b,c` or `lo:step:hi` (inclusive, rounded to the step grid).
std::vector<double> parse_sweep(std::string_view text);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
};

struct SpectrumStage {
  std::string name;
  Eigen::VectorXd eigenvalues;  ///< ascending
  double bulk_edge = 0.0;
  Histogram histogram;
};

struct SpectrumResult {
  std::vector<SpectrumStage> stages;  ///< "before", then "after" for non-Gaussian Wigner
};

SpectrumResult cmd_spectrum(const ExperimentConfig& cfg, std::ostream& log);

struct ErrorRate {
  std::size_t errors = 0;
  std::size_t trials = 0;
  double rate() const { return trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0; }
  /// 95% Wilson score interval.
  std::pair<double, double> wilson() const;
};

struct DetectSummary {
  std::string detector;
  ErrorRate type1;
  ErrorRate type2;
  double total_error() const { return type1.rate() + type2.rate(); }
  std::vector<DetectionReport> unspiked;
  std::vector<DetectionReport> spiked;
  nlohmann::json params;
};

DetectSummary cmd_detect(const ExperimentConfig& cfg, std::ostream& log);

struct PhaseRow {
  double beta = 0.0;
  std::optional<double> gamma_lower;
  std::optional<double> gamma_mle;
  std::optional<Verdict> verdict;
};

struct PhaseResult {
  std::string rate;
  std::optional<double> log_c;
  std::vector<PhaseRow> rows;
  /// Largest beta at which the lower curve exceeds beta^2 by more than `departure` (0: the bound fails at beta^2),
  /// scanning from the top of the beta range down.
  std::optional<double> departure_beta;
  std::optional<double> mle_crossing;
};

PhaseResult cmd_phase(const ExperimentConfig& cfg, std::ostream& log);

struct MomentRow {
  double parameter = 0.0;
  std::optional<double> gamma;
  std::size_t n = 0;
  MomentEstimate estimate;
  std::optional<double> exact;
  std::optional<double> limit;
};

std::vector<MomentRow> cmd_moment(const ExperimentConfig& cfg, std::ostream& log);

struct RhoStarResult {
  double rho_star = 0.0;
  double tolerance = 0.0;
};

RhoStarResult cmd_rho_star(const ExperimentConfig& cfg, std::ostream& log);

/// Named scalar thresholds for the configured prior, noise and (beta, gamma).
std::vector<std::pair<std::string, double>> cmd_thresholds(const ExperimentConfig& cfg, std::ostream& log);

/// Edge-scale of the PCA margin: 1 for Wigner, sqrt(gamma)(1 + sqrt(gamma))^{4/3} for Wishart.
double pca_edge_scale(ModelKind kind, double gamma);

/// Sample seed of trial t in arm a (0 unspiked, 1 spiked).
std::uint64_t trial_seed(std::uint64_t master, unsigned arm, std::size_t trial);

}  // namespace spikelab
