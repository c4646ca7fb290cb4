#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spikelab/eigensolver.hpp"
#include "spikelab/ensembles.hpp"
#include "spikelab/noise.hpp"

namespace spikelab {

enum class Decision { unspiked, spiked };

std::string to_string(Decision d);

/// Outcome of one detector run. `decision` is spiked iff `statistic` lies on
/// the rejection side (`reject_above` ? > : <=/<) of `threshold`.
struct DetectionReport {
  std::string detector;
  Decision decision = Decision::unspiked;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject_above = true;
  std::optional<double> spike_correlation;  ///< <v, x>^2 when the spike is known
  std::optional<double> correlation_floor;  ///< guaranteed asymptotic <v, x>^2 lower bound
  double elapsed_seconds = 0.0;
  nlohmann::json params = nlohmann::json::object();
};

/// Default PCA margin: 4 n^{-2/3} times the edge scale.
double default_pca_margin(std::size_t n, double edge_scale = 1.0);

/// Plain PCA. Wigner kinds reject iff lambda_max > 2 + margin. Wishart rejects
/// iff lambda_max > (1 + sqrt(gamma))^2 + margin, or, in negative-spike mode
/// (gamma < 1 only), iff lambda_min < (1 - sqrt(gamma))^2 - margin. In that
/// mode the statistic is the larger edge excess and the threshold is the margin.
DetectionReport pca_test(const SymmetricMatrixSample& sample, double margin,
                         bool negative_spike_mode = false);

/// Applies the score f = -p'/p entrywise to the off-diagonal of sqrt(n) Y,
/// zeroes the diagonal and rescales by 1/sqrt(n).
SymmetricMatrixSample pretransform(const SymmetricMatrixSample& sample, const NoiseModel& noise);

/// Score-transformed PCA: rejects iff lambda_max(f(sqrt(n) Y)) / sqrt(n) > 2 sqrt(F_P) + margin.
DetectionReport pretransformed_pca_test(const SymmetricMatrixSample& sample, const NoiseModel& noise,
                                        double margin);
/// Same, with a precomputed Fisher information.
DetectionReport pretransformed_pca_test(const SymmetricMatrixSample& sample, const NoiseModel& noise,
                                        double margin, double fisher);

/// Candidate spikes for the exhaustive MLE test.
class SupportEnumerator {
 public:
  /// All sign vectors +-1/sqrt(n), up to global sign (2^(n-1) candidates).
  static SupportEnumerator rademacher(std::size_t n);
  /// An explicit list of candidate vectors.
  static SupportEnumerator explicit_list(std::vector<Eigen::VectorXd> candidates);

  std::size_t dimension() const { return n_; }
  /// log of the number of candidates (log 2^(n-1) for Rademacher).
  double log_count() const;
  bool is_rademacher() const { return rademacher_; }
  const std::vector<Eigen::VectorXd>& candidates() const { return candidates_; }

 private:
  std::size_t n_ = 0;
  bool rademacher_ = false;
  std::vector<Eigen::VectorXd> candidates_;
};

/// Extremes of v^T Y v / ||v||^2 over the support.
struct SupportExtremes {
  double min = 0.0;
  double max = 0.0;
  std::uint64_t candidates = 0;
};

/// Rademacher supports are walked in Gray-code order with O(n) updates.
/// Throws ConfigError when the support has more than `max_candidates` elements.
SupportExtremes support_quadratic_extremes(const Eigen::MatrixXd& y, const SupportEnumerator& support,
                                           std::uint64_t max_candidates = std::uint64_t{1} << 24);

/// Exhaustive MLE test for the spiked Wishart model. beta < 0: T = min, reject
/// iff T < 1 + beta + epsilon. beta > 0: T = max, reject iff T > 1 + beta - epsilon.
DetectionReport mle_wishart_test(const SymmetricMatrixSample& sample, const SupportEnumerator& support,
                                 double beta, double epsilon,
                                 std::uint64_t max_candidates = std::uint64_t{1} << 24);

/// Feasible epsilon interval (0, eps_max) for the MLE test: the exponent
/// 2 gamma log c - beta -+ eps + log(1 + beta +- eps) must be negative.
/// Returns std::nullopt when no epsilon works.
struct EpsilonInterval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};
std::optional<EpsilonInterval> mle_epsilon_interval(double gamma, double log_c, double beta);

/// Point-mass test on sqrt(n) Y: the statistic is the fraction of off-diagonal
/// entries bit-equal to c; reject iff statistic <= m - epsilon.
DetectionReport point_mass_test(const Eigen::MatrixXd& scaled_entries, double c, double m,
                                double epsilon);

/// Chernoff bound exp(k (1 - z + log z) / 2) on Pr[chi2_k < z k] (z < 1) or
/// Pr[chi2_k > z k] (z > 1).
double chi2_chernoff(double z, int k);

nlohmann::json to_json(const DetectionReport& report);

}  // namespace spikelab
