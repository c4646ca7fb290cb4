#include "spikelab/ensembles.hpp"

#include <cmath>

#include "spikelab/detail/text.hpp"
#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

// Independent sub-streams of a sample seed.
enum StreamId : std::uint64_t { kSpikeStream = 0, kNoiseStream = 1 };

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void mirror_upper(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) m(j, i) = m(i, j);
}

void mirror_lower(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) m(i, j) = m(j, i);
}

void require_dimension(std::size_t n) {
  if (n < 2) throw ConfigError("matrix dimension must be at least 2");
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gwig:
      return "gwig";
    case ModelKind::wig:
      return "wig";
    case ModelKind::wish:
      return "wish";
  }
  return {};
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "gwig") return ModelKind::gwig;
  if (s == "wig") return ModelKind::wig;
  if (s == "wish") return ModelKind::wish;
  throw ConfigError("unknown model '" + std::string(s) + "' (expected gwig, wig, wish)");
}

std::string ModelDescriptor::to_string() const {
  std::string s = "model=" + spikelab::to_string(kind);
  if (kind == ModelKind::wish) {
    s += ";beta=" + detail::format_double(beta) + ";gamma=" + detail::format_double(gamma) +
         ";N=" + std::to_string(samples);
  } else {
    s += ";lambda=" + detail::format_double(lambda);
  }
  s += ";prior=" + prior;
  if (!noise.empty()) s += ";noise=" + noise;
  return s;
}

ModelDescriptor ModelDescriptor::parse(std::string_view s) {
  ModelDescriptor d;
  for (std::string_view field : detail::split(s, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed model descriptor '" + std::string(s) + "'");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "model") {
      d.kind = parse_model_kind(value);
    } else if (key == "lambda") {
      d.lambda = detail::parse_double(value, "lambda");
    } else if (key == "beta") {
      d.beta = detail::parse_double(value, "beta");
    } else if (key == "gamma") {
      d.gamma = detail::parse_double(value, "gamma");
    } else if (key == "N") {
      d.samples = static_cast<std::size_t>(detail::parse_double(value, "N"));
    } else if (key == "prior") {
      d.prior = value;
    } else if (key == "noise") {
      d.noise = value;
    } else {
      throw ConfigError("unknown model descriptor field '" + std::string(key) + "'");
    }
  }
  return d;
}

SymmetricMatrixSample sample_gwig(double lambda, const SpikePrior& prior, std::size_t n,
                                  std::uint64_t seed) {
  require_dimension(n);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  SymmetricMatrixSample s;
  s.n = n;
  s.seed = seed;
  s.model = {ModelKind::gwig, lambda, 0.0, 0.0, 0, prior.descriptor(), "gaussian"};

  const auto dim = static_cast<Eigen::Index>(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Stream noise_rng = Stream::derive(seed, kNoiseStream);
  s.entries.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) s.entries(i, j) = noise_rng.normal() * inv_sqrt_n;
    s.entries(j, j) = std::sqrt(2.0) * noise_rng.normal() * inv_sqrt_n;
  }
  if (lambda != 0.0) {
    Stream spike_rng = Stream::derive(seed, kSpikeStream);
    const Eigen::VectorXd x = to_eigen(prior.sample(n, spike_rng));
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) s.entries(i, j) += lambda * x(i) * x(j);
    s.spike = x;
  }
  mirror_upper(s.entries);
  return s;
}

SymmetricMatrixSample sample_wig(double lambda, const NoiseModel& noise, const SpikePrior& prior,
                                 std::size_t n, std::uint64_t seed) {
  require_dimension(n);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  SymmetricMatrixSample s;
  s.n = n;
  s.seed = seed;
  s.model = {ModelKind::wig, lambda, 0.0, 0.0, 0, prior.descriptor(), noise.descriptor()};

  const auto dim = static_cast<Eigen::Index>(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Stream noise_rng = Stream::derive(seed, kNoiseStream);
  s.entries.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) s.entries(i, j) = noise.sample(noise_rng) * inv_sqrt_n;
    s.entries(j, j) = noise.sample_diagonal(noise_rng) * inv_sqrt_n;
  }
  if (lambda != 0.0) {
    Stream spike_rng = Stream::derive(seed, kSpikeStream);
    const Eigen::VectorXd x = to_eigen(prior.sample(n, spike_rng));
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) s.entries(i, j) += lambda * x(i) * x(j);
    s.spike = x;
  }
  mirror_upper(s.entries);
  return s;
}

SymmetricMatrixSample sample_wig_discrete_noise(double lambda, const std::vector<Atom>& noise,
                                                const SpikePrior& prior, std::size_t n,
                                                std::uint64_t seed) {
  require_dimension(n);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  // Validates mean 0 / variance 1 and drops empty atoms.
  const SpikePrior law = SpikePrior::iid_atoms(noise);
  const auto& atoms = law.atom_law();

  SymmetricMatrixSample s;
  s.n = n;
  s.seed = seed;
  s.root_n_scaled = true;
  std::string noise_desc = law.descriptor();
  s.model = {ModelKind::wig, lambda, 0.0, 0.0, 0, prior.descriptor(),
             "discrete:" + noise_desc.substr(noise_desc.find(':') + 1)};

  auto draw = [&](Stream& rng) {
    double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < atoms.size() && u >= atoms[k].prob) {
      u -= atoms[k].prob;
      ++k;
    }
    return atoms[k].value;
  };

  const auto dim = static_cast<Eigen::Index>(n);
  Stream noise_rng = Stream::derive(seed, kNoiseStream);
  s.entries.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) s.entries(i, j) = draw(noise_rng);
  if (lambda != 0.0) {
    Stream spike_rng = Stream::derive(seed, kSpikeStream);
    const Eigen::VectorXd x = to_eigen(prior.sample(n, spike_rng));
    const double scale = lambda * std::sqrt(static_cast<double>(n));
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) s.entries(i, j) += scale * x(i) * x(j);
    s.spike = x;
  }
  mirror_upper(s.entries);
  return s;
}

std::size_t wishart_sample_count(std::size_t n, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) / gamma + 0.5));
}

std::optional<SymmetricMatrixSample> sample_wishart(double gamma, double beta,
                                                    const SpikePrior& prior, std::size_t n,
                                                    std::uint64_t seed, bool keep_samples) {
  require_dimension(n);
  if (!(beta >= -1.0)) throw ConfigError("beta must be at least -1");
  const std::size_t big_n = wishart_sample_count(n, gamma);
  if (big_n < 2) throw ConfigError("gamma too large: fewer than 2 samples");

  SymmetricMatrixSample s;
  s.n = n;
  s.seed = seed;
  s.model = {ModelKind::wish, 0.0, beta, static_cast<double>(n) / static_cast<double>(big_n), big_n,
             prior.descriptor(), ""};

  Eigen::VectorXd x;
  double norm2 = 0.0;
  if (beta != 0.0) {
    Stream spike_rng = Stream::derive(seed, kSpikeStream);
    x = to_eigen(prior.sample(n, spike_rng));
    norm2 = x.squaredNorm();
    // Rounding slack: Rademacher spikes have ||x||^2 = 1 only up to a few ulps.
    if (beta < 0.0 && -beta * norm2 > 1.0 + 1e-12) return std::nullopt;
  }

  const auto dim = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(big_n);
  Stream noise_rng = Stream::derive(seed, kNoiseStream);
  Eigen::MatrixXd samples(dim, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) samples(i, j) = noise_rng.normal();

  if (beta != 0.0) {
    // y = g + (sqrt(1 + beta ||x||^2) - 1) <g, x> / ||x||^2 x has covariance I + beta x x^T.
    const double c = (std::sqrt(std::max(0.0, 1.0 + beta * norm2)) - 1.0) / norm2;
    const Eigen::RowVectorXd proj = x.transpose() * samples;
    samples.noalias() += (c * x) * proj;
    s.spike = x;
  }

  s.entries = Eigen::MatrixXd::Zero(dim, dim);
  s.entries.selfadjointView<Eigen::Lower>().rankUpdate(samples, 1.0 / static_cast<double>(big_n));
  mirror_lower(s.entries);
  if (keep_samples) s.samples = std::move(samples);
  return s;
}

}  // namespace spikelab
