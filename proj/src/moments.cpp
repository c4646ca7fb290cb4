#include "spikelab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

#include "spikelab/ensembles.hpp"
#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

struct Chunk {
  std::vector<double> terms;
  std::size_t diverged = 0;
};

// term(overlap) returns NaN for a singular draw.
MomentEstimate run_chunks(const SpikePrior& prior, std::size_t n, std::size_t trials,
                          std::uint64_t seed, unsigned workers,
                          const std::function<double(double)>& term) {
  if (trials == 0) throw ConfigError("trials must be positive");
  workers = std::max(1u, workers);
  std::vector<Chunk> chunks(workers);
  auto work = [&](unsigned w) {
    const std::size_t begin = trials * w / workers;
    const std::size_t end = trials * (w + 1) / workers;
    Stream rng = Stream::derive(seed, w);
    const std::vector<double> overlaps = overlap_samples(prior, n, end - begin, rng);
    Chunk& c = chunks[w];
    c.terms.reserve(overlaps.size());
    for (double t : overlaps) {
      const double v = term(t);
      if (std::isnan(v)) {
        ++c.diverged;
      } else {
        c.terms.push_back(v);
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<double> terms;
  MomentEstimate est;
  for (Chunk& c : chunks) {
    terms.insert(terms.end(), c.terms.begin(), c.terms.end());
    est.diverged_count += c.diverged;
  }
  est.trials = trials;
  est.diverged = est.diverged_count > 0;
  if (terms.empty()) {
    est.value = std::numeric_limits<double>::infinity();
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  const double m = static_cast<double>(terms.size());
  double mean = 0.0;
  for (double v : terms) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : terms) ss += (v - mean) * (v - mean);
  est.value = mean;
  est.std_error = terms.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;

  const double total = mean * m;
  const std::size_t top = std::max<std::size_t>(1, terms.size() / 100);
  std::nth_element(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(top - 1), terms.end(),
                   std::greater<>());
  double top_sum = 0.0;
  for (std::size_t i = 0; i < top; ++i) top_sum += terms[i];
  est.top1pct_mass = total > 0.0 ? top_sum / total : 0.0;
  est.heavy_tail = est.top1pct_mass > 0.5;
  return est;
}

}  // namespace

MomentEstimate gwig_second_moment_mc(double lambda, const SpikePrior& prior, std::size_t n,
                                     std::size_t trials, std::uint64_t seed, unsigned workers) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  const double scale = 0.5 * static_cast<double>(n) * lambda * lambda;
  return run_chunks(prior, n, trials, seed, workers,
                    [scale](double t) { return std::exp(scale * t * t); });
}

double gwig_second_moment_spherical_exact(double lambda, std::size_t n) {
  if (n < 3) throw ConfigError("the exact spherical second moment needs n >= 3");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  const double a = 0.5;
  const double b = 0.5 * static_cast<double>(n);
  const double z = b * lambda * lambda;
  if (z > 700.0) {
    throw NumericError("1F1 argument n lambda^2 / 2 = " + std::to_string(z) +
                       " exceeds 700; use second_moment_limit instead");
  }
  if (z == 0.0) return 1.0;
  // term_k = (a)_k / (b)_k * z^k / k!, tracked as a log.
  const double log_z = std::log(z);
  double log_term = 0.0;
  double sum = 1.0;
  for (int k = 0; k < 100000; ++k) {
    const double dk = static_cast<double>(k);
    const double log_ratio = std::log(a + dk) - std::log(b + dk) + log_z - std::log(dk + 1.0);
    log_term += log_ratio;
    const double term = std::exp(log_term);
    sum += term;
    if (log_ratio < 0.0 && term < 1e-16 * sum) return sum;
  }
  throw NumericError("Kummer series did not converge");
}

double second_moment_limit(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("second moment limit needs lambda in [0, 1)");
  return 1.0 / std::sqrt(1.0 - lambda * lambda);
}

MomentEstimate wishart_second_moment_mc(double beta, double gamma, const SpikePrior& prior,
                                        std::size_t n, std::size_t trials, std::uint64_t seed,
                                        unsigned workers) {
  if (!(std::abs(beta) < 1.0)) throw ConfigError("Wishart second moment needs |beta| < 1");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  const double half_n = 0.5 * static_cast<double>(wishart_sample_count(n, gamma));
  const double b2 = beta * beta;
  return run_chunks(prior, n, trials, seed, workers, [=](double t) {
    const double u = b2 * t * t;
    if (u >= 1.0) return std::numeric_limits<double>::quiet_NaN();
    return std::exp(-half_n * std::log1p(-u));
  });
}

double power_bound(double second_moment, double type1) {
  if (!(type1 > 0.0 && type1 < 1.0)) throw ConfigError("type I error must lie in (0, 1)");
  if (!(second_moment >= 1.0)) throw ConfigError("second moment must be >= 1");
  const double a = type1;
  // (1-b)^2/a + b^2/(1-a) <= S  <=>  (b - (1-a))^2 <= a (1-a) (S - 1).
  const double b = (1.0 - a) - std::sqrt(a * (1.0 - a) * (second_moment - 1.0));
  return std::clamp(b, 0.0, 1.0);
}

}  // namespace spikelab
