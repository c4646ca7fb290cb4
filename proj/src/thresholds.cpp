#include "spikelab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spikelab/detail/text.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/numerics.hpp"

namespace spikelab {

namespace {

constexpr double kSmallT = 1e-6;

void check_beta(double beta) {
  if (!(beta > -1.0) || !std::isfinite(beta)) throw ConfigError("beta must lie in (-1, inf)");
}

// (w - t) / (1 - t^2), rearranged to avoid cancellation as t -> 1.
double w_minus_t_ratio(double beta, double t, double a, double s) {
  if (t <= 0.5) {
    const double w = 1.0 / (s + a);
    return (w - t) / (1.0 - t * t);
  }
  const double c = 0.5 / (beta + 1.0);
  return (1.0 / (1.0 + t) - c - c * a / (s + 1.0)) / (s + a);
}

}  // namespace

double F_nc(double beta, double t) {
  check_beta(beta);
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("F(beta, t) needs t in [0, 1]");
  if (t < kSmallT) return 0.5 * beta * beta * t * t;
  if (t == 1.0) return 0.5 * (beta - std::log1p(beta));
  const double bp1 = beta + 1.0;
  const double a = (1.0 - t * t) / (2.0 * t * bp1);
  const double s = std::hypot(a, 1.0);
  const double w = 1.0 / (s + a);
  // (1 - w^2) / (1 - t^2) = 1 / ((1 + w / (2A)) (1 - t^2))
  return bp1 * t * w_minus_t_ratio(beta, t, a, s) - 0.5 * (std::log1p(w / (2.0 * a)) + std::log1p(-t * t));
}

double F_over_beta2(double beta, double t) {
  if (std::abs(beta) < 1e-6) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("F(beta, t) needs t in [0, 1]");
    return t * t / (2.0 * (1.0 + t * t));
  }
  return F_nc(beta, t) / (beta * beta);
}

RateFunction RateFunction::spherical() {
  return {"sph", [](double t) { return rate_spherical(t); }, 1.0, true, ""};
}

RateFunction RateFunction::rademacher() {
  return {"rad", [](double t) { return rate_rademacher(t); }, 1.0, true, ""};
}

RateFunction RateFunction::sparse_rademacher(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("sparsity must lie in (0, 1]");
  if (rho == 1.0) return rademacher();
  return {"sparse:" + detail::format_double(rho),
          [rho](double t) { return rate_sparse_rademacher(rho, t); }, 1.0, true,
          "transferred rate: exact-support formula applied to the iid prior"};
}

RateFunction RateFunction::largebeta(std::vector<Atom> atoms) {
  // Validates mean 0 and variance 1.
  const std::vector<Atom> law = SpikePrior::iid_atoms(atoms).atom_law();
  std::string name = "largebeta:";
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (i) name += ',';
    name += detail::format_double(law[i].value) + '@' + detail::format_double(law[i].prob);
  }
  return {name, [law](double t) { return largebeta_rate(law, t); }, 1.0, true,
          "general-prior rate valid for large beta"};
}

RateFunction RateFunction::parse(std::string_view d) {
  if (d == "sph" || d == "spherical") return spherical();
  if (d == "rad" || d == "rademacher") return rademacher();
  if (d.starts_with("sparse:")) return sparse_rademacher(detail::parse_double(d.substr(7), "rho"));
  if (d.starts_with("largebeta:")) {
    const SpikePrior p = SpikePrior::parse("atoms:" + std::string(d.substr(10)));
    return largebeta(p.atom_law());
  }
  throw ConfigError("unknown rate function '" + std::string(d) +
                    "' (expected sph, rad, sparse:<rho> or largebeta:<atoms>)");
}

std::optional<RateFunction> default_rate(const SpikePrior& prior) {
  switch (prior.kind()) {
    case SpikePrior::Kind::spherical:
      return RateFunction::spherical();
    case SpikePrior::Kind::sparse_rademacher:
      return RateFunction::sparse_rademacher(prior.rho());
    case SpikePrior::Kind::iid_atoms:
      if (prior.is_rademacher()) return RateFunction::rademacher();
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

struct RateTable {
  std::vector<double> t;
  std::vector<double> f;
};

RateTable tabulate(const RateFunction& rate, int grid_size) {
  if (grid_size < 10) throw ConfigError("grid size must be at least 10");
  RateTable tab;
  for (int i = 1; i < grid_size; ++i) tab.t.push_back(static_cast<double>(i) / grid_size);
  for (int k = 5; k <= 12; ++k) tab.t.push_back(1.0 - std::pow(10.0, -k));
  std::sort(tab.t.begin(), tab.t.end());
  tab.t.erase(std::unique(tab.t.begin(), tab.t.end()), tab.t.end());
  tab.f.reserve(tab.t.size());
  for (double t : tab.t) tab.f.push_back(rate(t));
  return tab;
}

LowerBoundCheck check_table(const RateFunction& rate, const RateTable& tab, double beta,
                            double gamma_star) {
  LowerBoundCheck out;
  if (beta == 0.0) {
    out.holds = true;
    return out;
  }
  const double b2 = beta * beta;
  const double tol = 1e-10 * std::max(b2, gamma_star);
  const double curvature_margin = 0.5 * (gamma_star * rate.curvature - b2);
  if (curvature_margin < -tol) {
    out.witness_t = 0.0;
    out.worst_margin = curvature_margin;
    return out;
  }
  auto margin = [&](double t, double f) { return (gamma_star * f - F_nc(beta, t)) / (t * t); };
  std::size_t worst = 0;
  double worst_m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    const double m = margin(tab.t[i], tab.f[i]);
    if (m < worst_m) {
      worst_m = m;
      worst = i;
    }
  }
  double worst_t = tab.t[worst];
  const double lo = worst == 0 ? 0.5 * tab.t[0] : tab.t[worst - 1];
  const double hi = worst + 1 < tab.t.size() ? tab.t[worst + 1] : tab.t[worst];
  if (hi > lo) {
    const auto refined = numerics::minimize_scalar([&](double t) { return margin(t, rate(t)); }, lo, hi, 1e-12);
    if (refined.value < worst_m) {
      worst_m = refined.value;
      worst_t = refined.x;
    }
  }
  out.worst_margin = std::min(worst_m, curvature_margin);
  out.witness_t = worst_m <= curvature_margin ? worst_t : 0.0;
  out.holds = worst_m >= -tol;
  return out;
}

double lower_gamma(const RateFunction& rate, const RateTable& tab, double beta, double tolerance) {
  if (beta == 0.0) return 0.0;
  const double floor = beta * beta / rate.curvature;
  auto holds = [&](double g) { return check_table(rate, tab, beta, g).holds; };
  if (holds(floor)) return floor;
  // A rate that is not positive where F is leaves no finite gamma.
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    if (tab.f[i] <= 0.0 && F_nc(beta, tab.t[i]) > 0.0) return std::numeric_limits<double>::infinity();
  }
  double hi = 2.0 * floor;
  while (!holds(hi)) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("lower-bound curve search diverged at beta = " + std::to_string(beta));
  }
  const double g = numerics::bisect_predicate(holds, floor, hi, tolerance);
  return g;
}

}  // namespace

LowerBoundCheck wishart_lower_bound_holds(const RateFunction& rate, double beta, double gamma_star,
                                          int grid_size) {
  check_beta(beta);
  if (!(gamma_star > 0.0)) throw ConfigError("gamma* must be positive");
  return check_table(rate, tabulate(rate, grid_size), beta, gamma_star);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::contiguous: return "contiguous";
    case Verdict::pca_detects: return "pca_detects";
    case Verdict::mle_detects: return "mle_detects";
    case Verdict::open: return "open";
  }
  return "open";
}

std::vector<PhasePoint> wishart_lower_curve(const RateFunction& rate, const std::vector<double>& betas,
                                            double tolerance, int grid_size) {
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  for (double b : betas) check_beta(b);
  const RateTable tab = tabulate(rate, grid_size);
  std::vector<PhasePoint> out;
  out.reserve(betas.size());
  for (double b : betas) out.push_back({b, lower_gamma(rate, tab, b, tolerance), Verdict::contiguous});
  return out;
}

std::vector<PhasePoint> mle_upper_curve(double log_c, const std::vector<double>& betas) {
  if (!(log_c > 0.0)) throw ConfigError("log c must be positive");
  std::vector<PhasePoint> out;
  out.reserve(betas.size());
  for (double b : betas) {
    check_beta(b);
    out.push_back({b, (b - std::log1p(b)) / (2.0 * log_c), Verdict::mle_detects});
  }
  return out;
}

double sparse_support_log_count(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("sparsity must lie in (0, 1]");
  return rho * std::log(2.0) + numerics::binary_entropy(rho);
}

double mle_pca_crossing(double log_c) {
  if (!(log_c > 0.25)) throw ConfigError("the MLE curve meets beta^2 on (-1, 0) only for log c > 1/4");
  auto g = [log_c](double b) { return (b - std::log1p(b)) / (2.0 * log_c) - b * b; };
  return numerics::find_root(g, -1.0 + 1e-12, -1e-6, 1e-13);
}

Verdict classify_phase(double beta, double gamma, double gamma_lower, double gamma_mle) {
  if (beta * beta > gamma) return Verdict::pca_detects;
  if (gamma < gamma_mle) return Verdict::mle_detects;
  if (gamma > gamma_lower) return Verdict::contiguous;
  return Verdict::open;
}

double wigner_wishart_crude_bound(double lambda_star, double gamma) {
  if (!(lambda_star >= 0.0 && lambda_star <= 1.0)) throw ConfigError("lambda* must lie in [0, 1]");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  return std::sqrt(-std::expm1(-gamma * lambda_star * lambda_star));
}

double subgaussian_wishart_bound(double sigma, double beta) {
  if (!(beta > 0.0)) throw ConfigError("the subgaussian Wishart bound is for beta > 0");
  if (!(sigma >= 1.0)) throw ConfigError("sigma must be >= 1");
  return beta * beta * sigma * sigma;
}

double largebeta_rate(const std::vector<Atom>& atoms, double t) {
  std::vector<double> lp(atoms.size() * atoms.size());
  auto log_mgf = [&](double theta) {
    std::size_t k = 0;
    for (const Atom& a : atoms)
      for (const Atom& b : atoms) lp[k++] = std::log(a.prob) + std::log(b.prob) + theta * a.value * b.value;
    return numerics::log_sum_exp(lp);
  };
  return std::min(t * t - log_mgf(t), t * t - log_mgf(-t));
}

MonotonicityResult monotonicity_check_F(std::vector<double> betas, const std::vector<double>& ts) {
  std::sort(betas.begin(), betas.end());
  MonotonicityResult r;
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : ts) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("t grid must lie in (0, 1)");
    for (std::size_t i = 1; i < betas.size(); ++i) {
      const double inc = F_over_beta2(betas[i], t) - F_over_beta2(betas[i - 1], t);
      if (inc > worst) {
        worst = inc;
        r.beta_lo = betas[i - 1];
        r.beta_hi = betas[i];
        r.t = t;
      }
    }
    const double gap = std::abs(F_over_beta2(-0.999, t) + 0.5 * std::log1p(-t * t));
    r.worst_limit_gap = std::max(r.worst_limit_gap, gap);
  }
  r.worst_increase = betas.size() > 1 ? worst : 0.0;
  r.ok = (betas.size() < 2 || worst < 0.0) && r.worst_limit_gap <= 1e-2;
  return r;
}

}  // namespace spikelab
