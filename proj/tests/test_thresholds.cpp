#include <doctest.h>

#include <cmath>

#include "spikelab/errors.hpp"
#include "spikelab/priors.hpp"
#include "spikelab/thresholds.hpp"

using namespace spikelab;

namespace {

// Direct evaluation of the closed form, for comparison in the interior.
double F_direct(double beta, double t) {
  const double a = (1 - t * t) / (2 * t * (beta + 1));
  const double w = std::sqrt(a * a + 1) - a;
  return (1 + beta) * t * (w - t) / (1 - t * t) + 0.5 * std::log((1 - w * w) / (1 - t * t));
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double b = lo; b <= hi + 1e-12; b += step) out.push_back(std::round(b * 1e9) / 1e9);
  return out;
}

}  // namespace

TEST_CASE("F endpoint values and small-t behaviour") {
  CHECK(F_nc(0.7, 0.0) == 0.0);
  CHECK(F_nc(1.0, 1.0) == doctest::Approx(0.5 * (1 - std::log(2.0))));
  CHECK(F_nc(1.0, 1.0) == doctest::Approx(0.15343).epsilon(1e-4));
  CHECK(F_nc(0.5, 0.01) == doctest::Approx(1.25e-5).epsilon(0.1));
  CHECK_THROWS_AS(F_nc(-1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(F_nc(0.5, 1.5), ConfigError);
  for (double beta : {-0.9, -0.3, 0.4, 2.0})
    for (double t : {0.05, 0.3, 0.6, 0.9}) CHECK(F_nc(beta, t) == doctest::Approx(F_direct(beta, t)).epsilon(1e-9));
  // Continuity into both endpoint branches.
  for (double beta : {-0.9, 0.5, 3.0}) {
    CHECK(F_nc(beta, 1 - 1e-9) == doctest::Approx(F_nc(beta, 1.0)).epsilon(1e-6));
    CHECK(F_nc(beta, 2e-6) / F_nc(beta, 0.5e-6) == doctest::Approx(16.0).epsilon(1e-4));
  }
  // Second derivative at 0 is beta^2.
  const double h = 1e-3;
  CHECK(2 * F_nc(0.8, h) / (h * h) == doctest::Approx(0.64).epsilon(1e-3));
}

TEST_CASE("F is strictly increasing in t") {
  for (double beta : {-0.95, -0.5, 0.3, 1.0, 4.0}) {
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      const double f = F_nc(beta, i / 1000.0);
      CHECK(f > prev);
      prev = f;
    }
  }
}

TEST_CASE("monotonicity of F / beta^2 in beta") {
  const auto r = monotonicity_check_F({-0.9, -0.5, 0.5, 1, 3}, {0.5});
  CHECK(r.ok);
  const auto all = monotonicity_check_F(grid(-0.95, 4.95, 0.05), grid(0.05, 0.95, 0.05));
  CHECK(all.worst_increase < 0);
  CHECK(all.worst_limit_gap <= 1e-2);
  CHECK(std::abs(F_over_beta2(0.001, 0.5) - F_over_beta2(-0.001, 0.5)) < 1e-4);
  CHECK(F_over_beta2(0.0, 0.5) == doctest::Approx(0.25 / 2.5));
  // F ~ beta t / (1 + t) for large beta, so F / beta^2 decays like 1 / beta.
  CHECK(F_over_beta2(100.0, 0.5) == doctest::Approx(0.00312038).epsilon(1e-4));
  CHECK(F_over_beta2(1000.0, 0.5) < 1e-3);
  CHECK(F_over_beta2(1e6, 0.5) < 1e-6);
}

TEST_CASE("lower-bound checker") {
  CHECK(wishart_lower_bound_holds(RateFunction::spherical(), 0.4, 0.16).holds);
  CHECK(wishart_lower_bound_holds(RateFunction::rademacher(), 0.5, 0.25).holds);
  const auto bad = wishart_lower_bound_holds(RateFunction::rademacher(), -0.9, 0.81);
  CHECK_FALSE(bad.holds);
  CHECK(bad.witness_t > 0.9);
  // Curvature branch: any gamma* below beta^2 fails at t -> 0.
  const auto curv = wishart_lower_bound_holds(RateFunction::spherical(), 0.4, 0.159);
  CHECK_FALSE(curv.holds);
  CHECK(curv.witness_t == 0.0);
}

TEST_CASE("holding at beta_bar extends to larger beta") {
  const double lambda = 1.0;
  for (double bar : {-0.6, -0.3, 0.2}) {
    if (!wishart_lower_bound_holds(RateFunction::rademacher(), bar, bar * bar / lambda).holds) continue;
    for (double b = bar + 0.1; b < 2.0; b += 0.1) {
      if (std::abs(b) < 1e-9) continue;
      CHECK(wishart_lower_bound_holds(RateFunction::rademacher(), b, b * b / lambda, 2000).holds);
    }
  }
}

TEST_CASE("lower curves") {
  SUBCASE("spherical equals beta^2") {
    for (const auto& p : wishart_lower_curve(RateFunction::spherical(), grid(-0.98, 0.98, 0.07), 1e-6)) {
      CHECK(std::abs(p.gamma - p.beta * p.beta) < 1e-3);
    }
  }
  SUBCASE("Rademacher near zero") {
    const auto p = wishart_lower_curve(RateFunction::rademacher(), {0.01}, 1e-8);
    CHECK(p[0].gamma == doctest::Approx(1e-4).epsilon(1e-3));
    CHECK(subgaussian_wishart_bound(subgaussian_sigma_star(SpikePrior::rademacher()), 0.01) ==
          doctest::Approx(1e-4).epsilon(1e-6));
  }
  SUBCASE("Rademacher departs between -0.70 and -0.73") {
    const auto c = wishart_lower_curve(RateFunction::rademacher(), {-0.73, -0.70, -0.65, 0.5}, 1e-8);
    CHECK(c[0].gamma - 0.73 * 0.73 > 1e-4);
    CHECK(c[1].gamma - 0.49 < 1e-5);
    CHECK(c[2].gamma - 0.65 * 0.65 < 1e-5);
    CHECK(c[3].gamma - 0.25 < 1e-5);
  }
}

TEST_CASE("MLE curve") {
  const auto c = mle_upper_curve(std::log(2.0), {-0.9, 0.0});
  CHECK(c[0].gamma == doctest::Approx((-0.9 - std::log(0.1)) / (2 * std::log(2.0))));
  CHECK(c[0].gamma == doctest::Approx(1.0118).epsilon(1e-4));
  CHECK(c[1].gamma == 0.0);
  CHECK(std::abs(mle_pca_crossing(std::log(2.0)) + 0.84) < 0.01);
  CHECK(sparse_support_log_count(1.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(mle_upper_curve(0.0, {0.5}), ConfigError);
}

TEST_CASE("lower curve lies above the MLE curve") {
  // The t = 1 constraint of the lower bound is gamma log 2 >= F(beta, 1), i.e. gamma >= gamma_mle.
  for (double beta : {-0.95, -0.9, -0.85, -0.8, -0.5}) {
    const double gl = wishart_lower_curve(RateFunction::rademacher(), {beta}, 1e-8).front().gamma;
    const double gm = mle_upper_curve(std::log(2.0), {beta}).front().gamma;
    CHECK(gm == doctest::Approx(F_nc(beta, 1.0) / std::log(2.0)));
    CHECK(gl >= gm - 1e-7);
  }
}

TEST_CASE("phase classification") {
  CHECK(classify_phase(0.5, 0.2, 0.25, 0.1) == Verdict::pca_detects);
  CHECK(classify_phase(-0.9, 0.9, 0.95, 1.0) == Verdict::mle_detects);
  CHECK(classify_phase(0.3, 0.5, 0.09, 0.05) == Verdict::contiguous);
  CHECK(classify_phase(-0.9, 1.02, 1.05, 1.0118) == Verdict::open);
}

TEST_CASE("auxiliary bounds") {
  CHECK(wigner_wishart_crude_bound(1.0, 1.0) == doctest::Approx(std::sqrt(1 - std::exp(-1.0))));
  CHECK(wigner_wishart_crude_bound(1.0, 1.0) == doctest::Approx(0.7951).epsilon(1e-4));
  CHECK(wigner_wishart_crude_bound(0.0, 0.7) == 0.0);
  for (double g : {1e-2, 1e-4, 1e-6}) CHECK(std::pow(wigner_wishart_crude_bound(1.0, g), 2) / g == doctest::Approx(1.0).epsilon(g));
  CHECK(subgaussian_wishart_bound(1.0, 0.5) == 0.25);
  CHECK(subgaussian_wishart_bound(1.2, 0.5) == doctest::Approx(0.36));
  const double s = subgaussian_sigma_star(SpikePrior::sparse_rademacher(0.2));
  CHECK(subgaussian_wishart_bound(s, 0.3) == doctest::Approx(0.09 * s * s));
  CHECK_THROWS_AS(subgaussian_wishart_bound(1.0, -0.1), ConfigError);
}

TEST_CASE("large-beta rate") {
  const std::vector<Atom> rad{{-1, 0.5}, {1, 0.5}};
  CHECK(largebeta_rate(rad, 0.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(largebeta_rate(rad, 0.5) == doctest::Approx(0.25 - std::log(std::cosh(0.5))));
  CHECK(largebeta_rate(rad, 0.5) == doctest::Approx(0.1294).epsilon(1e-3));
  for (double t : {0.01, 0.05, 0.1}) CHECK(largebeta_rate(rad, t) == doctest::Approx(t * t / 2).epsilon(0.1));
  const auto r = RateFunction::parse("largebeta:-1@0.5,1@0.5");
  CHECK(r(0.5) == doctest::Approx(0.1294).epsilon(1e-3));
}

TEST_CASE("rate function handles") {
  CHECK(RateFunction::parse("sph")(0.6) == doctest::Approx(0.22314).epsilon(1e-5));
  CHECK(RateFunction::parse("sparse:0.03").note.find("transferred") != std::string::npos);
  CHECK_FALSE(default_rate(SpikePrior::parse("atoms:-1.224744871391589@0.3333333333333333,0@0.3333333333333334,1.224744871391589@0.3333333333333333")));
  CHECK(default_rate(SpikePrior::rademacher())->name == "rad");
  CHECK_THROWS_AS(RateFunction::parse("gauss"), ConfigError);
}

TEST_CASE("conditioning method") {
  SUBCASE("Rademacher: brute force over alpha_{++}") {
    CHECK(std::abs(conditioning_lambda_bar({{-1, 0.5}, {1, 0.5}}) - 1.0) < 1e-3);
    // Independent one-parameter scan of (4u - 1)^2 / (2 D).
    double best = 0;
    for (int i = 1; i < 100000; ++i) {
      const double u = 0.5 * i / 100000.0;
      if (std::abs(u - 0.25) < 1e-9) continue;
      const double v = 0.5 - u;
      const double d = 2 * u * std::log(u / 0.25) + 2 * v * std::log(v / 0.25);
      best = std::max(best, (4 * u - 1) * (4 * u - 1) / (2 * d));
    }
    CHECK(best <= 1.0 + 1e-6);
    CHECK(best > 0.999);
  }
  SUBCASE("sparse Rademacher") {
    CHECK(std::abs(conditioning_lambda_bar(SpikePrior::sparse_rademacher(0.184).atom_law()) - 1.0) < 5e-3);
    CHECK(conditioning_lambda_bar(SpikePrior::sparse_rademacher(0.1).atom_law()) < 0.99);
    CHECK(conditioning_lambda_bar(SpikePrior::sparse_rademacher(0.09).atom_law()) < 1.0);
    CHECK(conditioning_lambda_bar(SpikePrior::sparse_rademacher(1.0 / 3.0).atom_law()) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("lambda_bar never exceeds 1") {
    for (const auto& law : std::vector<std::vector<Atom>>{
             {{-1, 0.5}, {1, 0.5}},
             {{-2, 0.2}, {0.5, 0.8}},
             {{-std::sqrt(1.5), 1.0 / 3}, {0, 1.0 / 3}, {std::sqrt(1.5), 1.0 / 3}},
             {{-1.8257418583505538, 0.2}, {0.0, 0.4}, {0.9128709291752769, 0.4}},
         }) {
      const double l = conditioning_lambda_bar(law, {256, 1, 16.0});
      CHECK(l > 0.0);
      CHECK(l <= 1.0 + 1e-6);
    }
  }
  SUBCASE("two-atom asymmetric law beats the Gaussian threshold") {
    // Skewed atoms favour alignment; the supremum exceeds the local value 1.
    CHECK(conditioning_lambda_bar({{-2, 0.2}, {0.5, 0.8}}) < 1.0);
  }
  SUBCASE("rho*") {
    const double r = rho_star(5e-3);
    CHECK(std::abs(r - 0.184) < 5e-3);
    CHECK_THROWS_AS(rho_star(1e-5), ConfigError);
  }
  CHECK_THROWS_AS(conditioning_lambda_bar({{-2, 0.1}, {-1, 0.1}, {0, 0.3}, {0.5, 0.3}, {1.5, 0.2}}), ConfigError);
}
