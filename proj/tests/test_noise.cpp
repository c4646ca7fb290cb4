#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikelab/errors.hpp"
#include "spikelab/noise.hpp"
#include "spikelab/numerics.hpp"

using namespace spikelab;
namespace nm = spikelab::numerics;

namespace {

const double kGoldenFisher = 3.9430967650734;

double integral(const NoiseModel& noise, const std::function<double(double)>& g) {
  const double t = noise.integration_halfwidth();
  return nm::integrate([&](double w) { return g(w) * noise.density(w); }, -t, t, 1e-13, 1e-13).value;
}

}  // namespace

TEST_CASE("descriptor parsing") {
  CHECK(NoiseModel::parse("gaussian").is_gaussian());
  CHECK(NoiseModel::parse("bimodal").components().size() == 2);
  const auto m = NoiseModel::parse("mix:0.5@-0.6@0.8,0.5@0.6@0.8");
  CHECK(NoiseModel::parse(m.descriptor()).descriptor() == m.descriptor());
  CHECK_THROWS_AS(NoiseModel::parse("mix:0.5@-0.6@0.9,0.5@0.6@0.9"), ConfigError);  // variance 1.17
  CHECK_THROWS_AS(NoiseModel::parse("mix:0.5@0@1,0.5@0@0"), ConfigError);          // sd 0
  CHECK_THROWS_AS(NoiseModel::parse("laplace"), ConfigError);
}

TEST_CASE("constructed laws integrate to mean 0 and variance 1") {
  for (const char* d : {"gaussian", "bimodal", "mix:0.5@-0.6@0.8,0.5@0.6@0.8", "mix:0.25@-1.224744871391589@0.5,0.5@0@0.5,0.25@1.224744871391589@0.5"}) {
    const NoiseModel noise = NoiseModel::parse(d);
    CHECK(integral(noise, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(integral(noise, [](double w) { return w; })) < 1e-10);
    CHECK(integral(noise, [](double w) { return w * w; }) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("score") {
  CHECK(score(NoiseModel::standard_gaussian(), 1.7) == doctest::Approx(1.7));
  const NoiseModel b = NoiseModel::bimodal();
  CHECK(std::abs(score(b, 0.0)) < 1e-15);
  for (double w = -6.0; w <= 6.0; w += 0.25) {
    const double h = 1e-5;
    const double fd = -(b.log_density(w + h) - b.log_density(w - h)) / (2 * h);
    CHECK(std::abs(score(b, w) - fd) < 1e-6);
    // f' against a difference of f, and p'' against a difference of p'
    CHECK(b.score_derivative(w) == doctest::Approx((b.score(w + h) - b.score(w - h)) / (2 * h)).epsilon(1e-6));
    CHECK(b.density_d2(w) == doctest::Approx((b.density_d1(w + h) - b.density_d1(w - h)) / (2 * h)).epsilon(1e-5));
  }
  // Far tails stay finite where p underflows.
  CHECK(std::isfinite(score(b, 60.0)));
  CHECK(score(b, 60.0) == doctest::Approx((60.0 - 0.9) / 0.19));
}

TEST_CASE("Fisher information") {
  CHECK(std::abs(fisher_information(NoiseModel::standard_gaussian()) - 1.0) < 1e-9);
  const NoiseModel b = NoiseModel::bimodal();
  const double f = fisher_information(b);
  CHECK(f > 1.235);
  CHECK(f == doctest::Approx(kGoldenFisher).epsilon(1e-10));

  SUBCASE("E[f'] = F and E[f] = 0 by quadrature") {
    CHECK(integral(b, [&](double w) { return b.score_derivative(w); }) == doctest::Approx(f).epsilon(1e-9));
    CHECK(std::abs(integral(b, [&](double w) { return b.score(w); })) < 1e-10);
  }
  SUBCASE("Monte Carlo E[f(W)^2] within 0.5%") {
    Stream rng(21);
    const int m = 10000000;
    double s = 0;
    for (int i = 0; i < m; ++i) {
      const double v = b.score(b.sample(rng));
      s += v * v;
    }
    CHECK(s / m == doctest::Approx(f).epsilon(0.005));
  }
  SUBCASE("narrower components raise F") {
    double prev = 1.0;
    for (double sd : {0.9, 0.7, 0.5, 0.3, 0.1}) {
      const double m = std::sqrt(1 - sd * sd);
      const double fi = fisher_information(NoiseModel::mixture({{0.5, -m, sd}, {0.5, m, sd}}));
      CHECK(fi > prev);
      prev = fi;
    }
  }
  SUBCASE("F >= 1 with equality only for the Gaussian") {
    for (const char* d : {"mix:0.5@-0.6@0.8,0.5@0.6@0.8", "mix:0.25@-1.224744871391589@0.5,0.5@0@0.5,0.25@1.224744871391589@0.5",
                          "mix:0.5@0@0.5,0.5@0@1.3228756555322951"}) {
      CHECK(fisher_information(NoiseModel::parse(d)) > 1.0 + 1e-6);
    }
  }
}

TEST_CASE("translation function") {
  const NoiseModel g = NoiseModel::standard_gaussian();
  for (double a : {-0.3, -0.1, 0.1, 0.3})
    for (double b : {-0.3, -0.1, 0.1, 0.3}) CHECK(std::abs(translation_fn(g, a, b) - a * b) < 1e-8);
  const NoiseModel bm = NoiseModel::bimodal();
  CHECK(std::abs(translation_fn(bm, 0.0, 0.4)) < 1e-10);
  for (double a : {-0.2, 0.05, 0.2})
    for (double b : {-0.1, 0.15, 0.3}) CHECK(std::abs(translation_fn(bm, a, b) - translation_fn(bm, b, a)) < 1e-10);
  const double h = 0.002;
  const double mixed = (translation_fn(bm, h, h) - translation_fn(bm, h, -h) - translation_fn(bm, -h, h) +
                        translation_fn(bm, -h, -h)) / (4 * h * h);
  CHECK(mixed == doctest::Approx(fisher_information(bm)).epsilon(1e-4));
}

TEST_CASE("non-Gaussian thresholds") {
  auto t = nongaussian_thresholds(NoiseModel::standard_gaussian(), 1.0);
  CHECK(t.lower == doctest::Approx(1.0));
  CHECK(t.upper == doctest::Approx(1.0));
  t = nongaussian_thresholds_from_fisher(4.0, 1.0);
  CHECK(t.lower == 0.5);
  CHECK(t.upper == 0.5);
  t = nongaussian_thresholds(NoiseModel::bimodal(), 1.0);
  CHECK(t.lower == t.upper);
  CHECK(t.upper < 0.9);
  CHECK_THROWS_AS(nongaussian_thresholds_from_fisher(2.0, 1.5), ConfigError);
}
