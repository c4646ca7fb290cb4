#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spikelab/rng.hpp"

namespace spikelab {

/// One atom of a finitely supported coordinate law (value before 1/sqrt(n) scaling).
struct Atom {
  double value;
  double prob;
};

/// Law of the hidden spike x in dimension n.
///
/// - Spherical: uniform on the unit sphere.
/// - IidAtoms: coordinates iid, drawn as atom / sqrt(n). The atom law has mean 0
///   and variance 1.
/// - SparseRademacher(rho): coordinates iid, 0 w.p. 1 - rho and +-1/sqrt(rho n)
///   otherwise. SparseRademacher(1) is the Rademacher prior.
class SpikePrior {
 public:
  enum class Kind { spherical, iid_atoms, sparse_rademacher };

  static SpikePrior spherical();
  static SpikePrior rademacher();
  static SpikePrior sparse_rademacher(double rho);
  static SpikePrior iid_atoms(std::vector<Atom> atoms);

  /// Parses `spherical`, `rademacher`, `sparse:<rho>` or `atoms:v1@p1,v2@p2,...`.
  static SpikePrior parse(std::string_view descriptor);

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  bool is_rademacher() const;

  /// Coordinate law with zero-probability atoms removed. Not defined for the
  /// spherical prior.
  const std::vector<Atom>& atom_law() const;

  /// Canonical descriptor; parse(descriptor()) reproduces the prior.
  std::string descriptor() const;

  std::vector<double> sample(std::size_t n, Stream& rng) const;

 private:
  SpikePrior() = default;

  Kind kind_ = Kind::spherical;
  double rho_ = 1.0;
  std::vector<Atom> atoms_;
};

std::vector<double> sample_spike(const SpikePrior& prior, std::size_t n, Stream& rng);

/// `count` iid realisations of <x, x'> for independent spikes x, x' ~ prior in
/// dimension n. Draws are made from the exact law of the inner product
/// (binomial / multinomial counts for atom priors, z / sqrt(z^2 + chi2_{n-1})
/// for the sphere) rather than by materialising both vectors.
std::vector<double> overlap_samples(const SpikePrior& prior, std::size_t n, std::size_t count,
                                    Stream& rng);

// Rate functions of the overlap large deviations, Pr[|<x,x'>| >= t] ~ exp(-n f(t)).
double rate_spherical(double t);
double rate_rademacher(double t);
/// Exactly-rho-n-support sparse Rademacher rate; minimises over the fraction
/// zeta of jointly nonzero coordinates.
double rate_sparse_rademacher(double rho, double t);

/// Dispatches on the prior. Throws ConfigError for t outside [0, 1) or for
/// priors without a built-in rate function.
double rate_function(const SpikePrior& prior, double t);

/// Smallest sigma such that the coordinate law is sigma^2-subgaussian,
/// sqrt(sup_t 2 log E[exp(t pi)] / t^2). Spherical returns 1 by convention.
double subgaussian_sigma_star(const SpikePrior& prior);

}  // namespace spikelab
