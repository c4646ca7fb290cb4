#include "spikelab/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spikelab/detail/text.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/numerics.hpp"

namespace spikelab {

namespace {

constexpr double kLawTolerance = 1e-12;

std::vector<Atom> sparse_law(double rho) {
  const double a = 1.0 / std::sqrt(rho);
  std::vector<Atom> law;
  if (rho < 1.0) law.push_back({0.0, 1.0 - rho});
  law.push_back({a, rho / 2});
  law.push_back({-a, rho / 2});
  return law;
}

void validate_law(const std::vector<Atom>& atoms) {
  if (atoms.empty()) throw ConfigError("atom prior needs at least one atom");
  double total = 0.0, mean = 0.0, second = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.prob >= 0.0 && a.prob <= 1.0) || !std::isfinite(a.value)) {
      throw ConfigError("atom probabilities must lie in [0, 1] and values must be finite");
    }
    total += a.prob;
    mean += a.prob * a.value;
    second += a.prob * a.value * a.value;
  }
  std::ostringstream msg;
  if (std::abs(total - 1.0) > kLawTolerance) {
    msg << "atom probabilities sum to " << total << ", expected 1";
  } else if (std::abs(mean) > kLawTolerance) {
    msg << "atom law has mean " << mean << ", expected 0";
  } else if (std::abs(second - mean * mean - 1.0) > kLawTolerance) {
    msg << "atom law has variance " << second - mean * mean << ", expected 1";
  }
  if (!msg.str().empty()) throw ConfigError(msg.str());
}

// log E[exp(t a)] for a mean-zero atom law.
double log_mgf(const std::vector<Atom>& law, double t) {
  double amax = 0.0;
  for (const Atom& a : law) amax = std::max(amax, std::abs(a.value));
  if (std::abs(t) * amax < 1.0) {
    // E[expm1(t a) - t a] keeps full relative precision near t = 0.
    double s = 0.0;
    for (const Atom& a : law) s += a.prob * (std::expm1(t * a.value) - t * a.value);
    return std::log1p(s);
  }
  std::vector<double> terms;
  terms.reserve(law.size());
  for (const Atom& a : law) terms.push_back(std::log(a.prob) + t * a.value);
  return numerics::log_sum_exp(terms);
}

}  // namespace

SpikePrior SpikePrior::spherical() { return SpikePrior(); }

SpikePrior SpikePrior::rademacher() { return sparse_rademacher(1.0); }

SpikePrior SpikePrior::sparse_rademacher(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ConfigError("sparse Rademacher sparsity must lie in (0, 1], got " +
                      detail::format_double(rho));
  }
  SpikePrior p;
  p.kind_ = Kind::sparse_rademacher;
  p.rho_ = rho;
  p.atoms_ = sparse_law(rho);
  return p;
}

SpikePrior SpikePrior::iid_atoms(std::vector<Atom> atoms) {
  validate_law(atoms);
  std::erase_if(atoms, [](const Atom& a) { return a.prob == 0.0; });
  SpikePrior p;
  p.kind_ = Kind::iid_atoms;
  p.atoms_ = std::move(atoms);
  return p;
}

SpikePrior SpikePrior::parse(std::string_view d) {
  if (d == "spherical") return spherical();
  if (d == "rademacher") return rademacher();
  if (d.starts_with("sparse:")) return sparse_rademacher(detail::parse_double(d.substr(7), "sparsity"));
  if (d.starts_with("atoms:")) {
    std::vector<Atom> atoms;
    for (std::string_view item : detail::split(d.substr(6), ',')) {
      const auto parts = detail::split(item, '@');
      if (parts.size() != 2) throw ConfigError("atom must be value@prob, got '" + std::string(item) + "'");
      atoms.push_back({detail::parse_double(parts[0], "atom value"),
                       detail::parse_double(parts[1], "atom probability")});
    }
    return iid_atoms(std::move(atoms));
  }
  throw ConfigError("unknown prior descriptor '" + std::string(d) +
                    "' (expected spherical, rademacher, sparse:<rho>, atoms:v@p,...)");
}

bool SpikePrior::is_rademacher() const {
  if (kind_ == Kind::sparse_rademacher) return rho_ == 1.0;
  if (kind_ != Kind::iid_atoms || atoms_.size() != 2) return false;
  return std::abs(atoms_[0].value) == 1.0 && atoms_[0].value == -atoms_[1].value &&
         atoms_[0].prob == 0.5 && atoms_[1].prob == 0.5;
}

const std::vector<Atom>& SpikePrior::atom_law() const {
  if (kind_ == Kind::spherical) throw ConfigError("the spherical prior has no atom law");
  return atoms_;
}

std::string SpikePrior::descriptor() const {
  switch (kind_) {
    case Kind::spherical:
      return "spherical";
    case Kind::sparse_rademacher:
      return rho_ == 1.0 ? "rademacher" : "sparse:" + detail::format_double(rho_);
    case Kind::iid_atoms: {
      std::string s = "atoms:";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) s += ',';
        s += detail::format_double(atoms_[i].value) + "@" + detail::format_double(atoms_[i].prob);
      }
      return s;
    }
  }
  return {};
}

std::vector<double> SpikePrior::sample(std::size_t n, Stream& rng) const {
  if (n == 0) throw ConfigError("spike dimension must be positive");
  std::vector<double> x(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  switch (kind_) {
    case Kind::spherical: {
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (double& v : x) {
          v = rng.normal();
          norm2 += v * v;
        }
      } while (norm2 == 0.0);
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : x) v *= inv;
      break;
    }
    case Kind::sparse_rademacher: {
      const double a = scale / std::sqrt(rho_);
      if (rho_ == 1.0) {
        for (double& v : x) v = a * rng.sign();
      } else {
        for (double& v : x) {
          const double u = rng.uniform();
          v = u < rho_ / 2 ? a : (u < rho_ ? -a : 0.0);
        }
      }
      break;
    }
    case Kind::iid_atoms: {
      for (double& v : x) {
        double u = rng.uniform();
        std::size_t k = 0;
        while (k + 1 < atoms_.size() && u >= atoms_[k].prob) {
          u -= atoms_[k].prob;
          ++k;
        }
        v = atoms_[k].value * scale;
      }
      break;
    }
  }
  return x;
}

std::vector<double> sample_spike(const SpikePrior& prior, std::size_t n, Stream& rng) {
  return prior.sample(n, rng);
}

std::vector<double> overlap_samples(const SpikePrior& prior, std::size_t n, std::size_t count,
                                    Stream& rng) {
  if (n == 0) throw ConfigError("spike dimension must be positive");
  std::vector<double> out(count);
  const double dn = static_cast<double>(n);
  switch (prior.kind()) {
    case SpikePrior::Kind::spherical: {
      if (n == 1) {
        for (double& v : out) v = rng.sign();
        break;
      }
      // <x, x'> for x' fixed is distributed as the first coordinate of a uniform unit vector.
      std::gamma_distribution<double> chi2_half(0.5 * (dn - 1.0), 2.0);
      for (double& v : out) {
        const double z = rng.normal();
        const double rest = chi2_half(rng);
        v = z / std::sqrt(z * z + rest);
      }
      break;
    }
    case SpikePrior::Kind::sparse_rademacher: {
      // Coordinate products are 0 w.p. 1 - rho^2 and +-1/(rho n) otherwise.
      const double rho = prior.rho();
      const long long nn = static_cast<long long>(n);
      std::binomial_distribution<long long> support(nn, rho * rho);
      for (double& v : out) {
        const long long k = rho == 1.0 ? nn : support(rng);
        std::binomial_distribution<long long> plus(k, 0.5);
        const long long b = k > 0 ? plus(rng) : 0;
        v = static_cast<double>(2 * b - k) / (rho * dn);
      }
      break;
    }
    case SpikePrior::Kind::iid_atoms: {
      // Multinomial counts over the product law of two coordinates.
      const auto& law = prior.atom_law();
      std::vector<Atom> cells;
      for (const Atom& a : law)
        for (const Atom& b : law) cells.push_back({a.value * b.value, a.prob * b.prob});
      for (double& v : out) {
        long long remaining = static_cast<long long>(n);
        double mass_left = 1.0;
        double sum = 0.0;
        for (std::size_t c = 0; c < cells.size() && remaining > 0; ++c) {
          long long k = remaining;
          if (c + 1 < cells.size()) {
            const double p = std::clamp(cells[c].prob / mass_left, 0.0, 1.0);
            std::binomial_distribution<long long> draw(remaining, p);
            k = draw(rng);
          }
          sum += static_cast<double>(k) * cells[c].value;
          remaining -= k;
          mass_left -= cells[c].prob;
        }
        v = sum / dn;
      }
      break;
    }
  }
  return out;
}

double rate_spherical(double t) { return -0.5 * std::log1p(-t * t); }

double rate_rademacher(double t) {
  // log 2 - H((1 + t)/2) written without cancellation near t = 0.
  if (t >= 1.0) return std::log(2.0);
  return 0.5 * (std::log1p(-t * t) + 2.0 * t * std::atanh(t));
}

double rate_sparse_rademacher(double rho, double t) {
  if (rho == 1.0) return rate_rademacher(t);
  if (t == 0.0) return 0.0;
  using numerics::xlogx;
  const double h_rho = numerics::binary_entropy(rho);
  // zeta: fraction of coordinates in both supports.
  auto objective = [&](double zeta) {
    const double support_rate =
        xlogx(zeta) + 2.0 * xlogx(rho - zeta) + xlogx(1.0 - 2.0 * rho + zeta) + 2.0 * h_rho;
    if (zeta <= 0.0) return std::numeric_limits<double>::infinity();
    const double s = std::min(1.0, rho * t / zeta);
    return support_rate + zeta * rate_rademacher(s);
  };
  const double lo = std::max({rho * t, 2.0 * rho - 1.0, 0.0});
  const double hi = rho;
  if (hi - lo <= 0.0) return objective(hi);
  return numerics::grid_minimize(objective, lo, hi, 2048, 1e-10).value;
}

double rate_function(const SpikePrior& prior, double t) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw ConfigError("rate functions are defined for t in [0, 1), got " + detail::format_double(t));
  }
  switch (prior.kind()) {
    case SpikePrior::Kind::spherical:
      return rate_spherical(t);
    case SpikePrior::Kind::sparse_rademacher:
      return rate_sparse_rademacher(prior.rho(), t);
    case SpikePrior::Kind::iid_atoms:
      if (prior.is_rademacher()) return rate_rademacher(t);
      break;
  }
  throw ConfigError("no built-in rate function for prior " + prior.descriptor());
}

double subgaussian_sigma_star(const SpikePrior& prior) {
  if (prior.kind() == SpikePrior::Kind::spherical) return 1.0;
  const auto& law = prior.atom_law();
  double amax = 0.0;
  bool symmetric = true;
  for (const Atom& a : law) {
    amax = std::max(amax, std::abs(a.value));
    const bool mirrored = std::any_of(law.begin(), law.end(), [&](const Atom& b) {
      return b.value == -a.value && b.prob == a.prob;
    });
    symmetric = symmetric && mirrored;
  }
  const double t_lo = 1e-4;
  const double t_hi = 50.0 * std::max(1.0, amax);
  constexpr int kPoints = 4096;
  const double log_lo = std::log(t_lo);
  const double log_step = (std::log(t_hi) - log_lo) / (kPoints - 1);

  // The t -> 0 limit of the supremand is the variance.
  double best = 1.0;
  for (double direction : {1.0, -1.0}) {
    if (direction < 0 && symmetric) break;
    auto neg_ratio = [&](double log_t) {
      const double t = direction * std::exp(log_t);
      const double v = 2.0 * log_mgf(law, t) / (t * t);
      if (!std::isfinite(v)) throw NumericError("moment generating function overflowed");
      return -v;
    };
    const auto m = numerics::grid_minimize(neg_ratio, log_lo, log_lo + log_step * (kPoints - 1),
                                           kPoints, 1e-12);
    best = std::max(best, -m.value);
  }
  return std::sqrt(best);
}

}  // namespace spikelab
