#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spikelab/rng.hpp"

namespace spikelab {

struct MixtureComponent {
  double weight;
  double mean;
  double sd;
};

/// Unit-variance, mean-zero noise density for the off-diagonal entries of a
/// general Wigner matrix: a standard Gaussian or a finite Gaussian mixture.
///
/// All evaluators work through log-sum-exp over the components, so the score
/// -p'/p stays accurate far into the tails where p itself underflows.
class NoiseModel {
 public:
  static NoiseModel standard_gaussian();
  static NoiseModel mixture(std::vector<MixtureComponent> components);
  /// 1/2 N(-0.9, 0.19) + 1/2 N(0.9, 0.19) (variances), the default bimodal law.
  static NoiseModel bimodal();
  /// `gaussian`, `bimodal`, or `mix:w1@m1@s1,w2@m2@s2,...` (s = standard deviation).
  static NoiseModel parse(std::string_view descriptor);

  bool is_gaussian() const { return gaussian_; }
  const std::vector<MixtureComponent>& components() const { return components_; }
  std::string descriptor() const;

  double log_density(double w) const;
  double density(double w) const;
  /// p'(w)
  double density_d1(double w) const;
  /// p''(w)
  double density_d2(double w) const;
  /// f(w) = -p'(w)/p(w)
  double score(double w) const;
  /// f'(w)
  double score_derivative(double w) const;

  double sample(Stream& rng) const;
  /// Diagonal law: N(0, 2) for Gaussian noise (GOE), the off-diagonal law otherwise.
  double sample_diagonal(Stream& rng) const;

  /// Half-width T of the interval [-T, T] used for quadrature.
  double integration_halfwidth() const;

 private:
  NoiseModel() = default;

  // Posterior component weights at w and the per-component (w - m)/s^2.
  void responsibilities(double w, std::vector<double>& r, std::vector<double>& z) const;

  std::vector<MixtureComponent> components_;
  bool gaussian_ = false;
};

double score(const NoiseModel& noise, double w);

/// F_P = integral of p'^2 / p.
double fisher_information(const NoiseModel& noise);

/// tau(a, b) = log E_{z ~ P}[ p(z - a) p(z - b) / p(z)^2 ].
double translation_fn(const NoiseModel& noise, double a, double b);

struct ThresholdPair {
  double lower;  ///< lambda*_X / sqrt(F_P): detection impossible below
  double upper;  ///< 1 / sqrt(F_P): pre-transformed PCA succeeds above
};

ThresholdPair nongaussian_thresholds(const NoiseModel& noise, double lambda_star);
ThresholdPair nongaussian_thresholds_from_fisher(double fisher, double lambda_star);

}  // namespace spikelab
