#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spikelab/errors.hpp"
#include "spikelab/numerics.hpp"
#include "spikelab/rng.hpp"
#include "spikelab/thresholds.hpp"

namespace spikelab {

namespace {

using numerics::kl_term;

constexpr double kFlatD = 1e-12;
constexpr double kExcess = 1e-7;

// <alpha, beta>^2 / (2 D(alpha, alpha_bar)), scored by its local limit where D vanishes.
double ratio_from(double num, double d, double local_num, double local_den) {
  if (d >= kFlatD) return num * num / (2.0 * d);
  if (local_den <= 0.0) return 1.0;
  return local_num * local_num / local_den;
}

std::vector<Atom> validated(std::vector<Atom> atoms) {
  std::erase_if(atoms, [](const Atom& a) { return a.prob == 0.0; });
  // iid_atoms validates normalisation.
  atoms = SpikePrior::iid_atoms(atoms).atom_law();
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
  if (atoms.size() < 2) throw ConfigError("conditioning method needs at least two atoms");
  if (atoms.size() > 4) throw ConfigError("conditioning method supports at most 4 atoms");
  return atoms;
}

bool symmetric_three(const std::vector<Atom>& a) {
  return a.size() == 3 && a[1].value == 0.0 && std::abs(a[0].value + a[2].value) <= 1e-12 &&
         std::abs(a[0].prob - a[2].prob) <= 1e-12;
}

double two_atom_sup(const std::vector<Atom>& at) {
  const double x1 = at[0].value, x2 = at[1].value;
  const double p = at[0].prob, q = at[1].prob;
  const double b11 = x1 * x1, b12 = x1 * x2, b22 = x2 * x2;
  const double r11 = p * p, r12 = p * q, r22 = q * q;
  auto neg_ratio = [&](double x) {
    const double a12 = p - x;
    const double a22 = 1.0 - 2.0 * p + x;
    const double num = x * b11 + 2.0 * a12 * b12 + a22 * b22;
    const double d = kl_term(x, r11) + 2.0 * kl_term(a12, r12) + kl_term(a22, r22);
    const double dx = x - r11;
    const double lnum = dx * (b11 - 2.0 * b12 + b22);
    const double lden = dx * dx * (1.0 / r11 + 2.0 / r12 + 1.0 / r22);
    return -ratio_from(num, d, lnum, lden);
  };
  const double lo = std::max(0.0, 2.0 * p - 1.0);
  const auto best = numerics::grid_minimize(neg_ratio, lo, p, 100001, 1e-13);
  return -best.value;
}

double symmetric_three_sup(const std::vector<Atom>& at, const ConditioningOptions& opts) {
  const double q = at[2].prob;
  const double a2 = at[2].value * at[2].value;
  const double r_pm = q * q, r_0 = q * (1.0 - 2.0 * q), r_00 = (1.0 - 2.0 * q) * (1.0 - 2.0 * q);
  auto ratio = [&](double u, double v) {
    const double e = q - u - v;
    const double a00 = 1.0 - 4.0 * q + 2.0 * (u + v);
    if (e < 0.0 || a00 < 0.0) return -1.0;
    const double num = a2 * (2.0 * u - 2.0 * v);
    const double d = 2.0 * kl_term(u, r_pm) + 2.0 * kl_term(v, r_pm) + 4.0 * kl_term(e, r_0) +
                     kl_term(a00, r_00);
    const double du = u - r_pm, dv = v - r_pm, de = e - r_0, d00 = a00 - r_00;
    const double lden = 2.0 * (du * du + dv * dv) / r_pm + 4.0 * de * de / r_0 + d00 * d00 / r_00;
    return ratio_from(num, d, num, lden);
  };
  const int g = std::max(2, opts.grid);
  double ulo = 0.0, uhi = q, vlo = 0.0, vhi = q;
  double best = 1.0, bu = r_pm, bv = r_pm;
  for (int round = 0; round <= opts.refinements; ++round) {
    const double hu = (uhi - ulo) / (g - 1), hv = (vhi - vlo) / (g - 1);
    for (int i = 0; i < g; ++i) {
      const double u = ulo + i * hu;
      for (int j = 0; j < g; ++j) {
        const double v = vlo + j * hv;
        const double r = ratio(u, v);
        if (r > best) {
          best = r;
          bu = u;
          bv = v;
        }
      }
    }
    const double wu = (uhi - ulo) / opts.zoom, wv = (vhi - vlo) / opts.zoom;
    ulo = std::max(0.0, bu - 0.5 * wu);
    uhi = std::min(q, bu + 0.5 * wu);
    vlo = std::max(0.0, bv - 0.5 * wv);
    vhi = std::min(q, bv + 0.5 * wv);
  }
  return best;
}

// Compass search over the free (s-1) x (s-1) block from deterministic random
// interior starts.
double general_sup(const std::vector<Atom>& at) {
  const std::size_t s = at.size();
  const std::size_t m = s - 1;
  std::vector<double> bar(s * s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) bar[i * s + j] = at[i].prob * at[j].prob;

  auto complete = [&](const std::vector<double>& free, std::vector<double>& alpha) {
    alpha.assign(s * s, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) alpha[i * s + j] = free[i * m + j];
    double corner = at[m].prob;
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        row += free[i * m + j];
        col += free[j * m + i];
      }
      alpha[i * s + m] = at[i].prob - row;
      alpha[m * s + i] = at[i].prob - col;
      corner -= alpha[m * s + i];
    }
    alpha[m * s + m] = corner;
    return std::all_of(alpha.begin(), alpha.end(), [](double v) { return v >= 0.0; });
  };
  std::vector<double> alpha;
  auto objective = [&](const std::vector<double>& free) {
    if (!complete(free, alpha)) return -1.0;
    double num = 0.0, d = 0.0, lden = 0.0;
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        const double x = alpha[i * s + j], r = bar[i * s + j];
        num += x * at[i].value * at[j].value;
        d += kl_term(x, r);
        lden += (x - r) * (x - r) / r;
      }
    return ratio_from(num, d, num, lden);
  };

  Stream rng(0x5eed'c0de'0000'0001ULL);
  double best = 1.0;
  const double pmin = std::min_element(at.begin(), at.end(), [](const Atom& x, const Atom& y) {
                        return x.prob < y.prob;
                      })->prob;
  for (int start = 0; start < 64; ++start) {
    // Sinkhorn-balance a random positive matrix to the marginals, then mix with the product law.
    std::vector<double> k(s * s);
    for (double& v : k) v = rng.uniform();
    for (int it = 0; it < 500; ++it) {
      for (std::size_t i = 0; i < s; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s; ++j) row += k[i * s + j];
        for (std::size_t j = 0; j < s; ++j) k[i * s + j] *= at[i].prob / row;
      }
      for (std::size_t j = 0; j < s; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < s; ++i) col += k[i * s + j];
        for (std::size_t i = 0; i < s; ++i) k[i * s + j] *= at[j].prob / col;
      }
    }
    const double theta = rng.uniform();
    std::vector<double> x(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        x[i * m + j] = (1.0 - theta) * bar[i * s + j] + theta * k[i * s + j];
    double fx = objective(x);
    for (double h = 0.25 * pmin; h > 1e-12;) {
      bool moved = false;
      for (std::size_t c = 0; c < x.size(); ++c) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> y = x;
          y[c] += dir * h;
          const double fy = objective(y);
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            moved = true;
          }
        }
      }
      if (!moved) h *= 0.5;
    }
    best = std::max(best, fx);
  }
  return best;
}

}  // namespace

double conditioning_sup(const std::vector<Atom>& atoms, const ConditioningOptions& opts) {
  const std::vector<Atom> at = validated(atoms);
  double sup = 1.0;
  if (at.size() == 2) {
    sup = two_atom_sup(at);
  } else if (symmetric_three(at)) {
    sup = symmetric_three_sup(at, opts);
  } else {
    sup = general_sup(at);
  }
  // The local ratio at the product coupling equals 1, so the supremum is at least 1.
  return std::max(sup, 1.0);
}

double conditioning_lambda_bar(const std::vector<Atom>& atoms, const ConditioningOptions& opts) {
  return 1.0 / std::sqrt(conditioning_sup(atoms, opts));
}

double rho_star(double tolerance, const ConditioningOptions& opts) {
  if (!(tolerance >= 1e-4)) throw ConfigError("rho* tolerance must be >= 1e-4");
  auto optimal = [&](double rho) {
    const auto law = SpikePrior::sparse_rademacher(rho).atom_law();
    return conditioning_sup(law, opts) <= 1.0 + kExcess;
  };
  return numerics::bisect_predicate(optimal, 0.05, 1.0 / 3.0, tolerance);
}

}  // namespace spikelab
