#pragma once

#include <cstddef>
#include <cstdint>

#include "spikelab/priors.hpp"

namespace spikelab {

/// Monte Carlo estimate of a second moment E[(dQ/dP)^2].
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  bool diverged = false;            ///< some term hit the singular guard
  std::size_t diverged_count = 0;   ///< terms excluded from the mean
  double top1pct_mass = 0.0;        ///< share of the sum carried by the largest 1% of terms
  bool heavy_tail = false;          ///< top1pct_mass > 0.5
};

/// Mean of exp(n lambda^2 <x,x'>^2 / 2) over `trials` overlap draws. Work is
/// split into `workers` contiguous chunks; chunk w draws from derive(seed, w).
MomentEstimate gwig_second_moment_mc(double lambda, const SpikePrior& prior, std::size_t n,
                                     std::size_t trials, std::uint64_t seed, unsigned workers = 1);

/// 1F1(1/2; n/2; n lambda^2 / 2) by the Kummer series. Requires n >= 3 and
/// n lambda^2 / 2 <= 700.
double gwig_second_moment_spherical_exact(double lambda, std::size_t n);

/// (1 - lambda^2)^{-1/2}, for lambda in [0, 1).
double second_moment_limit(double lambda);

/// Mean of (1 - beta^2 <x,x'>^2)^{-N/2} with N = round(n / gamma). Draws with
/// beta^2 <x,x'>^2 >= 1 are excluded and counted.
MomentEstimate wishart_second_moment_mc(double beta, double gamma, const SpikePrior& prior,
                                        std::size_t n, std::size_t trials, std::uint64_t seed,
                                        unsigned workers = 1);

/// Smallest type II error b in [0, 1] with (1-b)^2/a + b^2/(1-a) <= S.
double power_bound(double second_moment, double type1);

}  // namespace spikelab
