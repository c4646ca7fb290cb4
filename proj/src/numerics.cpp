#include "spikelab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "spikelab/errors.hpp"

namespace spikelab::numerics {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double xlogy_ratio(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

double kl_term(double x, double r) {
  if (x == 0.0) return r;
  const double y = (x - r) / r;
  if (std::abs(y) < 1e-3) {
    // (1 + y) log(1 + y) - y = sum_{k >= 2} (-1)^k y^k / (k (k - 1))
    double sum = 0.0, pow = y * y;
    for (int k = 2; k < 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * pow / (k * (k - 1));
      pow *= y;
    }
    return r * sum;
  }
  return r * ((1.0 + y) * std::log1p(y) - y);
}

double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= xlogx(p);
  return h;
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

Quadrature integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol, &error, &l1);
  const double abs_error = error;
  if (!std::isfinite(value) || abs_error > abs_tol + rel_tol * std::abs(value) * 10.0) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: value=" << value
        << " error estimate=" << abs_error << " (abs_tol=" << abs_tol << ")";
    throw NumericError(msg.str());
  }
  return {value, abs_error};
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              double x_tol) {
  if (hi < lo) std::swap(lo, hi);
  if (hi - lo <= x_tol) {
    const double x = 0.5 * (lo + hi);
    return {x, f(x)};
  }
  // Brent works in bits of relative precision; 34 bits is ~6e-11.
  const int bits = std::clamp(static_cast<int>(-std::log2(x_tol)) + 1, 8,
                              std::numeric_limits<double>::digits / 2 + 8);
  std::uintmax_t max_iter = 500;
  auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter);
  // Brent never evaluates the endpoints; they may be the true minimum.
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo < fx) return {lo, flo};
  if (fhi < fx) return {hi, fhi};
  return {x, fx};
}

ScalarMinimum grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                            int points, double x_tol) {
  if (points < 2 || hi <= lo) return {lo, f(lo)};
  const double h = (hi - lo) / (points - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + i * h;
    const double v = f(x);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double a = std::max(lo, lo + (best - 1) * h);
  const double b = std::min(hi, lo + (best + 1) * h);
  ScalarMinimum refined = minimize_scalar(f, a, b, x_tol);
  if (refined.value <= best_value) return refined;
  return {best + 1 == points ? hi : lo + best * h, best_value};
}

double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]";
    throw NumericError(msg.str());
  }
  std::uintmax_t max_iter = 300;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, max_iter);
  return 0.5 * (a + b);
}

}  // namespace spikelab::numerics
