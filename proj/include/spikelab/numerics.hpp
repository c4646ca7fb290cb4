#pragma once

#include <functional>
#include <span>

namespace spikelab::numerics {

/// x log x with the convention 0 log 0 = 0.
double xlogx(double x);
/// x log(x / y) with 0 log(0 / y) = 0.
double xlogy_ratio(double x, double y);
/// Binary entropy in nats.
double binary_entropy(double p);
/// x log(x / r) - x + r, accurate when x is close to r. Summed over a pair of
/// probability vectors it gives their KL divergence without cancellation.
double kl_term(double x, double r);
/// Shannon entropy of a probability vector in nats.
double entropy(std::span<const double> probs);
double log_sum_exp(std::span<const double> values);

struct Quadrature {
  double value;
  double error;
};

/// Adaptive Gauss-Kronrod (61-point) quadrature on [a, b]. Throws NumericError
/// when the error estimate exceeds abs_tol + rel_tol * |value|.
Quadrature integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-12);

struct ScalarMinimum {
  double x;
  double value;
};

/// Brent minimization of f on [lo, hi]; the returned bracket width is below
/// x_tol (relative to |x|, floored at x_tol).
ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              double x_tol = 1e-10);

/// Grid-then-Brent minimization: evaluates f on `points` equispaced nodes in
/// [lo, hi] (endpoints included), then refines within the neighbouring cells
/// of the best node.
ScalarMinimum grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                            int points, double x_tol = 1e-10);

/// Bisection on a monotone predicate: `pred(lo)` is false and `pred(hi)` true.
/// Returns the midpoint of the final bracket of width <= tol.
double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double tol);

/// Root of a continuous function with a sign change on [lo, hi].
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-13);

}  // namespace spikelab::numerics
