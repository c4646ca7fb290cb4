#include "spikelab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "spikelab/detail/text.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/numerics.hpp"

namespace spikelab {

namespace {

constexpr double kMomentTolerance = 1e-12;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

NoiseModel NoiseModel::standard_gaussian() {
  NoiseModel m;
  m.components_ = {{1.0, 0.0, 1.0}};
  m.gaussian_ = true;
  return m;
}

NoiseModel NoiseModel::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw ConfigError("noise mixture needs at least one component");
  double total = 0.0, mean = 0.0, second = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !(c.sd > 0.0) || !std::isfinite(c.mean) || !std::isfinite(c.sd)) {
      throw ConfigError("mixture components need weight > 0, sd > 0 and a finite mean");
    }
    total += c.weight;
    mean += c.weight * c.mean;
    second += c.weight * (c.sd * c.sd + c.mean * c.mean);
  }
  std::ostringstream msg;
  if (std::abs(total - 1.0) > kMomentTolerance) {
    msg << "mixture weights sum to " << total << ", expected 1";
  } else if (std::abs(mean) > kMomentTolerance) {
    msg << "noise mean is " << mean << ", expected 0";
  } else if (std::abs(second - 1.0) > kMomentTolerance) {
    msg << "noise variance is " << second << ", expected 1";
  }
  if (!msg.str().empty()) throw ConfigError(msg.str());
  NoiseModel m;
  m.components_ = std::move(components);
  m.gaussian_ = m.components_.size() == 1 && m.components_[0].mean == 0.0 && m.components_[0].sd == 1.0;
  return m;
}

NoiseModel NoiseModel::bimodal() {
  const double sd = std::sqrt(0.19);
  return mixture({{0.5, -0.9, sd}, {0.5, 0.9, sd}});
}

NoiseModel NoiseModel::parse(std::string_view d) {
  if (d == "gaussian") return standard_gaussian();
  if (d == "bimodal") return bimodal();
  if (d.starts_with("mix:")) {
    std::vector<MixtureComponent> comps;
    for (std::string_view item : detail::split(d.substr(4), ',')) {
      const auto parts = detail::split(item, '@');
      if (parts.size() != 3) {
        throw ConfigError("mixture component must be weight@mean@sd, got '" + std::string(item) + "'");
      }
      comps.push_back({detail::parse_double(parts[0], "weight"), detail::parse_double(parts[1], "mean"),
                       detail::parse_double(parts[2], "sd")});
    }
    return mixture(std::move(comps));
  }
  throw ConfigError("unknown noise descriptor '" + std::string(d) +
                    "' (expected gaussian, bimodal, mix:w@m@s,...)");
}

std::string NoiseModel::descriptor() const {
  if (gaussian_) return "gaussian";
  std::string s = "mix:";
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) s += ',';
    const auto& c = components_[i];
    s += detail::format_double(c.weight) + "@" + detail::format_double(c.mean) + "@" +
         detail::format_double(c.sd);
  }
  return s;
}

void NoiseModel::responsibilities(double w, std::vector<double>& r, std::vector<double>& z) const {
  const std::size_t k = components_.size();
  r.resize(k);
  z.resize(k);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = components_[i];
    const double u = (w - c.mean) / c.sd;
    r[i] = std::log(c.weight) - 0.5 * u * u - std::log(c.sd);
    z[i] = u / c.sd;
    top = std::max(top, r[i]);
  }
  double total = 0.0;
  for (double& v : r) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : r) v /= total;
}

double NoiseModel::log_density(double w) const {
  if (components_.size() == 1) {
    const auto& c = components_[0];
    const double u = (w - c.mean) / c.sd;
    return -0.5 * u * u - std::log(c.sd) - kLogSqrt2Pi;
  }
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    const double u = (w - c.mean) / c.sd;
    terms.push_back(std::log(c.weight) - 0.5 * u * u - std::log(c.sd));
  }
  return numerics::log_sum_exp(terms) - kLogSqrt2Pi;
}

double NoiseModel::density(double w) const { return std::exp(log_density(w)); }

double NoiseModel::density_d1(double w) const { return -density(w) * score(w); }

double NoiseModel::density_d2(double w) const {
  std::vector<double> r, z;
  responsibilities(w, r, z);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double var = components_[i].sd * components_[i].sd;
    s += r[i] * (z[i] * z[i] - 1.0 / var);
  }
  return density(w) * s;
}

double NoiseModel::score(double w) const {
  if (components_.size() == 1) {
    const auto& c = components_[0];
    return (w - c.mean) / (c.sd * c.sd);
  }
  std::vector<double> r, z;
  responsibilities(w, r, z);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * z[i];
  return s;
}

double NoiseModel::score_derivative(double w) const {
  std::vector<double> r, z;
  responsibilities(w, r, z);
  // f' = -p''/p + f^2
  double f = 0.0, second = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double var = components_[i].sd * components_[i].sd;
    f += r[i] * z[i];
    second += r[i] * (1.0 / var - z[i] * z[i]);
  }
  return second + f * f;
}

double NoiseModel::sample(Stream& rng) const {
  std::size_t k = 0;
  if (components_.size() > 1) {
    double u = rng.uniform();
    while (k + 1 < components_.size() && u >= components_[k].weight) {
      u -= components_[k].weight;
      ++k;
    }
  }
  return components_[k].mean + components_[k].sd * rng.normal();
}

double NoiseModel::sample_diagonal(Stream& rng) const {
  if (gaussian_) return std::numbers::sqrt2 * rng.normal();
  return sample(rng);
}

double NoiseModel::integration_halfwidth() const {
  double max_mean = 0.0, max_sd = 0.0;
  for (const auto& c : components_) {
    max_mean = std::max(max_mean, std::abs(c.mean));
    max_sd = std::max(max_sd, c.sd);
  }
  return max_mean + 12.0 * max_sd;
}

double score(const NoiseModel& noise, double w) { return noise.score(w); }

namespace {

// Integrates over [-T, T] split at the component means so each panel is smooth.
double integrate_over_support(const NoiseModel& noise, const std::function<double(double)>& f,
                              double extra_width) {
  const double t = noise.integration_halfwidth() + extra_width;
  std::vector<double> cuts = {-t, t};
  for (const auto& c : noise.components())
    if (std::abs(c.mean) < t) cuts.push_back(c.mean);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += numerics::integrate(f, cuts[i], cuts[i + 1], 1e-11, 1e-12).value;
  }
  return total;
}

}  // namespace

double fisher_information(const NoiseModel& noise) {
  return integrate_over_support(
      noise,
      [&](double w) {
        const double f = noise.score(w);
        return noise.density(w) * f * f;
      },
      0.0);
}

double translation_fn(const NoiseModel& noise, double a, double b) {
  const double value = integrate_over_support(
      noise,
      [&](double z) {
        return std::exp(noise.log_density(z - a) + noise.log_density(z - b) - noise.log_density(z));
      },
      std::abs(a) + std::abs(b));
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw NumericError("translation function integral diverged at a=" + detail::format_double(a) +
                       ", b=" + detail::format_double(b));
  }
  return std::log(value);
}

ThresholdPair nongaussian_thresholds_from_fisher(double fisher, double lambda_star) {
  if (!(lambda_star > 0.0 && lambda_star <= 1.0)) {
    throw ConfigError("lambda_star must lie in (0, 1]");
  }
  if (!(fisher > 0.0)) throw ConfigError("Fisher information must be positive");
  const double upper = 1.0 / std::sqrt(fisher);
  return {lambda_star * upper, upper};
}

ThresholdPair nongaussian_thresholds(const NoiseModel& noise, double lambda_star) {
  return nongaussian_thresholds_from_fisher(fisher_information(noise), lambda_star);
}

}  // namespace spikelab
