#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spikelab/noise.hpp"
#include "spikelab/priors.hpp"

namespace spikelab {

enum class ModelKind { gwig, wig, wish };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

/// Parameters a sample was drawn with.
struct ModelDescriptor {
  ModelKind kind = ModelKind::gwig;
  double lambda = 0.0;  ///< Wigner signal strength
  double beta = 0.0;    ///< Wishart spike strength
  double gamma = 0.0;   ///< Wishart aspect ratio n/N actually realised
  std::size_t samples = 0;  ///< Wishart N
  std::string prior;
  std::string noise;

  bool spiked() const { return kind == ModelKind::wish ? beta != 0.0 : lambda != 0.0; }
  std::string to_string() const;
  static ModelDescriptor parse(std::string_view s);
};

struct SymmetricMatrixSample {
  std::size_t n = 0;
  /// Y. When `root_n_scaled` is set the entries hold sqrt(n) * Y instead.
  Eigen::MatrixXd entries;
  ModelDescriptor model;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> spike;
  /// Wishart only: the n x N sample matrix X with Y = X X^T / N.
  std::optional<Eigen::MatrixXd> samples;
  bool root_n_scaled = false;
};

/// Y = lambda x x^T + W / sqrt(n), W from the GOE (off-diagonal N(0,1), diagonal N(0,2)).
SymmetricMatrixSample sample_gwig(double lambda, const SpikePrior& prior, std::size_t n,
                                  std::uint64_t seed);

/// Y = lambda x x^T + W / sqrt(n) with off-diagonal noise from `noise` and
/// diagonal from its diagonal law.
SymmetricMatrixSample sample_wig(double lambda, const NoiseModel& noise, const SpikePrior& prior,
                                 std::size_t n, std::uint64_t seed);

/// Wigner model with a finitely supported noise law (atoms value@prob, unit
/// variance). Entries are generated and stored on the sqrt(n) * Y scale so
/// unperturbed entries equal an atom bit-exactly.
SymmetricMatrixSample sample_wig_discrete_noise(double lambda, const std::vector<Atom>& noise,
                                                const SpikePrior& prior, std::size_t n,
                                                std::uint64_t seed);

/// N = round(n / gamma), ties rounding up.
std::size_t wishart_sample_count(std::size_t n, double gamma);

/// Spiked Wishart Y = X X^T / N with columns iid N(0, I + beta x x^T).
/// Returns std::nullopt (the failure event) iff beta < 0 and |beta| ||x||^2 > 1.
std::optional<SymmetricMatrixSample> sample_wishart(double gamma, double beta,
                                                    const SpikePrior& prior, std::size_t n,
                                                    std::uint64_t seed, bool keep_samples = false);

}  // namespace spikelab
