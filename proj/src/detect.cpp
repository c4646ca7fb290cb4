#include "spikelab/detect.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>

#include "spikelab/errors.hpp"
#include "spikelab/numerics.hpp"

namespace spikelab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::MatrixXd unscaled(const SymmetricMatrixSample& s) {
  if (!s.root_n_scaled) return s.entries;
  return s.entries / std::sqrt(static_cast<double>(s.n));
}

std::optional<double> correlation(const SymmetricMatrixSample& s, const Eigen::VectorXd& v) {
  if (!s.spike) return std::nullopt;
  const double c = v.dot(*s.spike);
  return c * c;
}

}  // namespace

std::string to_string(Decision d) { return d == Decision::spiked ? "spiked" : "unspiked"; }

double default_pca_margin(std::size_t n, double edge_scale) {
  return 4.0 * std::pow(static_cast<double>(n), -2.0 / 3.0) * edge_scale;
}

DetectionReport pca_test(const SymmetricMatrixSample& sample, double margin, bool negative_spike_mode) {
  if (!(margin > 0.0)) throw ConfigError("PCA margin must be positive");
  const auto start = Clock::now();
  DetectionReport r;
  r.detector = "pca";
  r.params = {{"margin", margin}, {"model", sample.model.to_string()}};

  const Eigen::MatrixXd y = unscaled(sample);
  if (sample.model.kind != ModelKind::wish) {
    const EigenPair top = top_eig(y);
    r.statistic = top.value;
    r.threshold = 2.0 + margin;
    r.spike_correlation = correlation(sample, top.vector);
  } else {
    const double gamma = sample.model.gamma;
    const double upper = std::pow(1.0 + std::sqrt(gamma), 2);
    if (!negative_spike_mode) {
      const EigenPair top = top_eig(y);
      r.statistic = top.value;
      r.threshold = upper + margin;
      r.spike_correlation = correlation(sample, top.vector);
    } else {
      if (gamma >= 1.0) {
        throw ConfigError("negative-spike PCA needs gamma < 1 (the bulk touches 0 otherwise)");
      }
      const double lower = std::pow(1.0 - std::sqrt(gamma), 2);
      const ExtremeEigenpairs ext = extreme_eigs(y);
      const double excess_top = ext.top.value - upper;
      const double excess_bottom = lower - ext.bottom.value;
      r.statistic = std::max(excess_top, excess_bottom);
      r.threshold = margin;
      r.spike_correlation = correlation(sample, excess_top >= excess_bottom ? ext.top.vector : ext.bottom.vector);
      r.params["negative_spike_mode"] = true;
      r.params["lambda_max"] = ext.top.value;
      r.params["lambda_min"] = ext.bottom.value;
    }
    r.params["gamma"] = gamma;
  }
  r.reject_above = true;
  r.decision = r.statistic > r.threshold ? Decision::spiked : Decision::unspiked;
  r.elapsed_seconds = seconds_since(start);
  return r;
}

SymmetricMatrixSample pretransform(const SymmetricMatrixSample& sample, const NoiseModel& noise) {
  const auto n = static_cast<Eigen::Index>(sample.n);
  const double root_n = std::sqrt(static_cast<double>(sample.n));
  const double to_hat = sample.root_n_scaled ? 1.0 : root_n;
  SymmetricMatrixSample out;
  out.n = sample.n;
  out.model = sample.model;
  out.seed = sample.seed;
  out.spike = sample.spike;
  out.entries.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.entries(j, j) = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = noise.score(sample.entries(i, j) * to_hat) / root_n;
      out.entries(i, j) = v;
      out.entries(j, i) = v;
    }
  }
  return out;
}

DetectionReport pretransformed_pca_test(const SymmetricMatrixSample& sample, const NoiseModel& noise,
                                        double margin) {
  return pretransformed_pca_test(sample, noise, margin, fisher_information(noise));
}

DetectionReport pretransformed_pca_test(const SymmetricMatrixSample& sample, const NoiseModel& noise,
                                        double margin, double fisher) {
  if (!(margin > 0.0)) throw ConfigError("PCA margin must be positive");
  const auto start = Clock::now();
  const SymmetricMatrixSample transformed = pretransform(sample, noise);
  const EigenPair top = top_eig(transformed.entries);

  DetectionReport r;
  r.detector = "transform-pca";
  r.statistic = top.value;
  r.threshold = 2.0 * std::sqrt(fisher) + margin;
  r.reject_above = true;
  r.decision = r.statistic > r.threshold ? Decision::spiked : Decision::unspiked;
  r.spike_correlation = correlation(sample, top.vector);
  const double lambda = sample.model.lambda;
  const double critical = 1.0 / std::sqrt(fisher);
  if (lambda > critical) r.correlation_floor = std::pow(lambda - critical, 2) / (lambda * lambda);
  r.params = {{"margin", margin}, {"fisher_information", fisher}, {"noise", noise.descriptor()},
              {"model", sample.model.to_string()}};
  if (r.correlation_floor) r.params["correlation_floor"] = *r.correlation_floor;
  r.elapsed_seconds = seconds_since(start);
  return r;
}

SupportEnumerator SupportEnumerator::rademacher(std::size_t n) {
  if (n < 1) throw ConfigError("support dimension must be positive");
  SupportEnumerator s;
  s.n_ = n;
  s.rademacher_ = true;
  return s;
}

SupportEnumerator SupportEnumerator::explicit_list(std::vector<Eigen::VectorXd> candidates) {
  if (candidates.empty()) throw ConfigError("explicit support must be nonempty");
  SupportEnumerator s;
  s.n_ = static_cast<std::size_t>(candidates.front().size());
  for (const auto& c : candidates) {
    if (static_cast<std::size_t>(c.size()) != s.n_) throw ConfigError("support vectors differ in length");
    if (c.squaredNorm() == 0.0) throw ConfigError("support vectors must be nonzero");
  }
  s.candidates_ = std::move(candidates);
  return s;
}

double SupportEnumerator::log_count() const {
  if (rademacher_) return static_cast<double>(n_ - 1) * std::log(2.0);
  return std::log(static_cast<double>(candidates_.size()));
}

SupportExtremes support_quadratic_extremes(const Eigen::MatrixXd& y, const SupportEnumerator& support,
                                           std::uint64_t max_candidates) {
  const auto n = static_cast<Eigen::Index>(support.dimension());
  if (y.rows() != n || y.cols() != n) throw ConfigError("support dimension does not match the matrix");
  SupportExtremes out;
  if (!support.is_rademacher()) {
    const auto& cands = support.candidates();
    if (cands.size() > max_candidates) throw ConfigError("support exceeds the candidate cap");
    out.min = std::numeric_limits<double>::infinity();
    out.max = -std::numeric_limits<double>::infinity();
    for (const auto& v : cands) {
      const double q = v.dot(y * v) / v.squaredNorm();
      out.min = std::min(out.min, q);
      out.max = std::max(out.max, q);
    }
    out.candidates = cands.size();
    return out;
  }

  if (n - 1 >= 63 || (std::uint64_t{1} << (n - 1)) > max_candidates) {
    std::ostringstream msg;
    msg << "Rademacher support in dimension " << n << " has 2^" << n - 1
        << " candidates, above the cap of " << max_candidates << "; reduce n";
    throw ConfigError(msg.str());
  }
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  // Walk v in {+-1}^n with v_0 = +1 fixed; sign flips follow a Gray code.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd u = y * v;
  double q = v.dot(u);
  double lo = q, hi = q;
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto i = static_cast<Eigen::Index>(std::countr_zero(g)) + 1;
    const double vi = v(i);
    q += -4.0 * vi * u(i) + 4.0 * y(i, i);
    u.noalias() -= (2.0 * vi) * y.col(i);
    v(i) = -vi;
    if ((g & 0xffff) == 0) {
      // Re-anchor to bound accumulated rounding.
      u.noalias() = y * v;
      q = v.dot(u);
    }
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const double norm2 = static_cast<double>(n);
  out.min = lo / norm2;
  out.max = hi / norm2;
  out.candidates = count;
  return out;
}

DetectionReport mle_wishart_test(const SymmetricMatrixSample& sample, const SupportEnumerator& support,
                                 double beta, double epsilon, std::uint64_t max_candidates) {
  if (beta == 0.0 || !(beta > -1.0) || !std::isfinite(beta)) {
    throw ConfigError("MLE test needs beta in (-1, inf) with beta != 0");
  }
  if (!(epsilon > 0.0)) throw ConfigError("MLE epsilon must be positive");
  const auto start = Clock::now();
  const SupportExtremes ext = support_quadratic_extremes(unscaled(sample), support, max_candidates);
  DetectionReport r;
  r.detector = "mle";
  if (beta < 0.0) {
    r.statistic = ext.min;
    r.threshold = 1.0 + beta + epsilon;
    r.reject_above = false;
    r.decision = r.statistic < r.threshold ? Decision::spiked : Decision::unspiked;
  } else {
    r.statistic = ext.max;
    r.threshold = 1.0 + beta - epsilon;
    r.reject_above = true;
    r.decision = r.statistic > r.threshold ? Decision::spiked : Decision::unspiked;
  }
  r.params = {{"beta", beta},
              {"epsilon", epsilon},
              {"candidates", ext.candidates},
              {"model", sample.model.to_string()}};
  r.elapsed_seconds = seconds_since(start);
  return r;
}

std::optional<EpsilonInterval> mle_epsilon_interval(double gamma, double log_c, double beta) {
  if (beta == 0.0 || !(beta > -1.0)) throw ConfigError("beta must lie in (-1, inf) and be nonzero");
  if (!(gamma > 0.0) || !(log_c > 0.0)) throw ConfigError("gamma and log c must be positive");
  const double base = 2.0 * gamma * log_c;
  std::function<double(double)> exponent;
  double eps_limit = 0.0;
  if (beta < 0.0) {
    exponent = [=](double eps) { return base - beta - eps + std::log1p(beta + eps); };
    eps_limit = -beta;
  } else {
    exponent = [=](double eps) { return base - beta + eps + std::log1p(beta - eps); };
    eps_limit = beta;
  }
  // The exponent increases in eps on (0, eps_limit) and equals 2 gamma log c > 0 at the limit.
  if (exponent(0.0) >= 0.0) return std::nullopt;
  const double root = numerics::find_root(exponent, 0.0, eps_limit, 1e-15);
  return EpsilonInterval{0.0, root};
}

DetectionReport point_mass_test(const Eigen::MatrixXd& scaled_entries, double c, double m,
                                double epsilon) {
  if (!(m > 0.0 && m <= 1.0)) throw ConfigError("point mass m must lie in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < m)) throw ConfigError("epsilon must lie in (0, m)");
  const auto start = Clock::now();
  const Eigen::Index n = scaled_entries.rows();
  std::uint64_t hits = 0, total = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      hits += scaled_entries(i, j) == c ? 1 : 0;
      ++total;
    }
  }
  DetectionReport r;
  r.detector = "point-mass";
  r.statistic = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  r.threshold = m - epsilon;
  r.reject_above = false;
  r.decision = r.statistic <= r.threshold ? Decision::spiked : Decision::unspiked;
  r.params = {{"atom", c}, {"mass", m}, {"epsilon", epsilon}};
  r.elapsed_seconds = seconds_since(start);
  return r;
}

double chi2_chernoff(double z, int k) {
  if (!(z > 0.0)) throw ConfigError("chi-square Chernoff bound needs z > 0");
  if (k < 1) throw ConfigError("chi-square Chernoff bound needs k >= 1");
  return std::exp(0.5 * static_cast<double>(k) * (1.0 - z + std::log(z)));
}

nlohmann::json to_json(const DetectionReport& report) {
  nlohmann::json j;
  j["detector"] = report.detector;
  j["params"] = report.params;
  j["statistic"] = report.statistic;
  j["threshold"] = report.threshold;
  j["decision"] = to_string(report.decision);
  j["correlation"] = report.spike_correlation ? nlohmann::json(*report.spike_correlation) : nlohmann::json();
  j["wall_ms"] = report.elapsed_seconds * 1e3;
  return j;
}

}  // namespace spikelab
