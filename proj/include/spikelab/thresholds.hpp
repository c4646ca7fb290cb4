#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spikelab/priors.hpp"

namespace spikelab {

/// Wishart lower-bound exponent
///   F(beta, t) = (1 + beta) t (w - t) / (1 - t^2) + 1/2 log((1 - w^2) / (1 - t^2)),
///   w = sqrt(A^2 + 1) - A,  A = (1 - t^2) / (2 t (beta + 1)),
/// with F(beta, 0) = 0 and F(beta, 1) = (beta - log(1 + beta)) / 2.
double F_nc(double beta, double t);

/// F(beta, t) / beta^2, with the beta -> 0 limit t^2 / (2 (1 + t^2)).
double F_over_beta2(double beta, double t);

/// A rate function f_X with the metadata the lower-bound checker needs.
struct RateFunction {
  std::string name;
  std::function<double(double)> eval;
  /// lim_{t -> 0} 2 f(t) / t^2.
  double curvature = 1.0;
  bool local_chernoff = true;
  std::string note;

  double operator()(double t) const { return eval(t); }

  static RateFunction spherical();
  static RateFunction rademacher();
  /// Exact-support sparse Rademacher rate, used for the iid prior as a transferred rate.
  static RateFunction sparse_rademacher(double rho);
  /// min(t^2 - log M(t), t^2 - log M(-t)) for the product law of two atom draws.
  static RateFunction largebeta(std::vector<Atom> atoms);
  /// `sph`, `rad`, `sparse:<rho>` or `largebeta:v1@p1,...`.
  static RateFunction parse(std::string_view descriptor);
};

/// The built-in rate for spherical and sparse/plain Rademacher priors; other
/// priors have none and need an explicit choice.
std::optional<RateFunction> default_rate(const SpikePrior& prior);

struct LowerBoundCheck {
  bool holds = false;
  double witness_t = 0.0;     ///< worst t (0 when the curvature test fails)
  double worst_margin = 0.0;  ///< min over t of (gamma* f(t) - F(beta, t)) / t^2
};

/// Checks gamma* f(t) >= F(beta, t) on (0, 1): the curvature at t = 0, a grid
/// of `grid_size` points plus points clustered at t = 1, and Brent refinement
/// around the worst grid margin.
LowerBoundCheck wishart_lower_bound_holds(const RateFunction& rate, double beta, double gamma_star,
                                          int grid_size = 10000);

enum class Verdict { contiguous, pca_detects, mle_detects, open };
std::string to_string(Verdict v);

struct PhasePoint {
  double beta = 0.0;
  double gamma = 0.0;
  Verdict verdict = Verdict::open;
};

/// For each beta the smallest gamma* for which the lower bound holds, by
/// bisection to `tolerance`; +inf when the rate is not positive somewhere F is.
std::vector<PhasePoint> wishart_lower_curve(const RateFunction& rate, const std::vector<double>& betas,
                                            double tolerance = 1e-4, int grid_size = 10000);

/// gamma(beta) = (beta - log(1 + beta)) / (2 log c).
std::vector<PhasePoint> mle_upper_curve(double log_c, const std::vector<double>& betas);

/// log c for the sparse Rademacher support: rho log 2 + H(rho).
double sparse_support_log_count(double rho);

/// The beta in (-1, 0) where the MLE curve meets gamma = beta^2.
double mle_pca_crossing(double log_c);

/// Classifies (beta, gamma): PCA first, then MLE, then the lower bound.
Verdict classify_phase(double beta, double gamma, double gamma_lower, double gamma_mle);

/// sqrt(1 - exp(-gamma lambda*^2)).
double wigner_wishart_crude_bound(double lambda_star, double gamma);

/// beta^2 sigma^2 for beta > 0.
double subgaussian_wishart_bound(double sigma, double beta);

/// min(t^2 - log M(t), t^2 - log M(-t)), M(theta) = sum_ab pi_a pi_b exp(theta a b).
double largebeta_rate(const std::vector<Atom>& atoms, double t);

struct MonotonicityResult {
  bool ok = true;
  double beta_lo = 0.0;  ///< worst adjacent pair
  double beta_hi = 0.0;
  double t = 0.0;
  double worst_increase = 0.0;
  double worst_limit_gap = 0.0;  ///< |F(-0.999, t)/beta^2 + log(1 - t^2)/2|
};

/// Checks that F(beta, t) / beta^2 decreases strictly along the sorted beta
/// grid at every t, and that at beta = -0.999 it is within 1e-2 of
/// -log(1 - t^2) / 2.
MonotonicityResult monotonicity_check_F(std::vector<double> betas, const std::vector<double>& ts);

/// lambda_bar = [sup_alpha <alpha, beta>^2 / (2 D(alpha, pi pi^T))]^{-1/2}
/// over couplings alpha with both marginals pi. Supports up to 4 atoms;
/// symmetric 3-atom laws use the reduced two-variable search.
struct ConditioningOptions {
  int grid = 1024;
  int refinements = 2;
  double zoom = 16.0;
};
double conditioning_lambda_bar(const std::vector<Atom>& atoms, const ConditioningOptions& opts = {});

/// sup of the conditioning ratio (1 / lambda_bar^2).
double conditioning_sup(const std::vector<Atom>& atoms, const ConditioningOptions& opts = {});

/// Critical sparsity: the rho in [0.05, 1/3] below which lambda_bar < 1.
double rho_star(double tolerance, const ConditioningOptions& opts = {});

}  // namespace spikelab
