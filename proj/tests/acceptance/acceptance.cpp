// Acceptance report: one PASS/FAIL line per criterion. Exits 0 once every
// criterion has run; pass --strict to make the exit code the number of failures.
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spikelab/detect.hpp"
#include "spikelab/eigensolver.hpp"
#include "spikelab/ensembles.hpp"
#include "spikelab/experiment.hpp"
#include "spikelab/moments.hpp"
#include "spikelab/noise.hpp"
#include "spikelab/numerics.hpp"
#include "spikelab/priors.hpp"
#include "spikelab/thresholds.hpp"

using namespace spikelab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "spikelab_acceptance";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

Outcome bbp_edges() {
  Outcome o;
  const std::size_t n = 800;
  double top0 = 0, top1 = 0, corr = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    top0 += top_eig(sample_gwig(0.0, SpikePrior::spherical(), n, 1000 + s).entries).value;
    const auto y = sample_gwig(1.5, SpikePrior::spherical(), n, 2000 + s);
    const auto e = top_eig(y.entries);
    top1 += e.value;
    corr += std::pow(e.vector.dot(*y.spike), 2);
  }
  top0 /= seeds;
  top1 /= seeds;
  corr /= seeds;
  o.detail << "mean top eig lambda=0: " << top0 << ", lambda=1.5: " << top1 << " (target 2.1667), <v,x>^2: " << corr
           << " (target " << 1 - 1 / 2.25 << ")";
  o.require(std::abs(top0 - 2.0) <= 0.10, "null edge");
  o.require(std::abs(top1 - (1.5 + 1 / 1.5)) <= 0.10, "spiked edge");
  o.require(std::abs(corr - (1 - 1 / 2.25)) <= 0.08, "overlap");
  return o;
}

Outcome figure1() {
  Outcome o;
  const std::size_t n = 1200;
  const NoiseModel noise = NoiseModel::bimodal();
  const auto y = sample_wig(0.9, noise, SpikePrior::spherical(), n, 12);
  const double plain = top_eig(y.entries).value;
  const double transformed = top_eig(pretransform(y, noise).entries).value;
  const double fp = fisher_information(noise);
  const double target = 0.9 * fp + 1 / 0.9;
  o.detail << "plain lambda_max " << plain << " (edge 2), transformed " << transformed << " vs " << target
           << " (F_P = " << fp << ")";
  o.require(plain <= 2.15, "plain spectrum has an outlier");
  o.require(std::abs(transformed / target - 1) <= 0.05, "transformed outlier");
  return o;
}

Outcome second_moment() {
  Outcome o;
  for (double lambda : {0.3, 0.6}) {
    const auto e = gwig_second_moment_mc(lambda, SpikePrior::rademacher(), 2000, 1000000, 31);
    const double lim = second_moment_limit(lambda);
    o.detail << "rad lambda=" << lambda << ": " << e.value << " +- " << e.std_error << " vs " << lim << "; ";
    o.require(std::abs(e.value - lim) <= 3 * e.std_error, "Rademacher limit");
  }
  int agree = 0;
  for (int n : {10, 30}) {
    for (double lambda : {0.3, 0.5, 0.7}) {
      const auto e = gwig_second_moment_mc(lambda, SpikePrior::spherical(), n, 1000000, 40 + n);
      const double exact = gwig_second_moment_spherical_exact(lambda, n);
      const bool ok = std::abs(e.value - exact) <= 3 * e.std_error;
      agree += ok;
      o.require(ok, "spherical n=" + std::to_string(n));
    }
  }
  o.detail << "spherical exact agreement " << agree << "/6";
  return o;
}

Outcome rho_star_check() {
  Outcome o;
  const double r = rho_star(1e-3);
  o.detail << "rho* = " << r;
  o.require(std::abs(r - 0.184) <= 0.005, "rho*");
  for (double rho : {1.0 / 3.0, 0.5, 1.0}) {
    const double s = subgaussian_sigma_star(SpikePrior::sparse_rademacher(rho));
    o.detail << ", sigma*(" << rho << ") = " << s;
    o.require(std::abs(s - 1) <= 1e-4, "sigma* = 1");
  }
  const double s02 = subgaussian_sigma_star(SpikePrior::sparse_rademacher(0.2));
  o.detail << ", sigma*(0.2) = " << s02;
  o.require(s02 > 1, "sigma*(0.2) > 1");
  return o;
}

Outcome figure3() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.command = "phase";
  cfg.prior = "rademacher";
  cfg.betas = parse_sweep("-0.99:0.01:0.99");
  cfg.tolerance = 1e-8;
  cfg.out = scratch("phase.csv");
  std::ostringstream log;
  const auto phase = cmd_phase(cfg, log);
  double worst_above = 0;
  for (const auto& row : phase.rows) {
    if (row.beta >= -0.65) worst_above = std::max(worst_above, std::abs(*row.gamma_lower - row.beta * row.beta));
  }
  const auto departure = phase.departure_beta;
  std::vector<double> nz;
  for (double b : cfg.betas)
    if (b != 0.0) nz.push_back(b);
  const double crossing = phase.mle_crossing.value_or(0.0);
  o.detail << "rad max |gap| on beta >= -0.65: " << worst_above << ", departs at "
           << (departure ? std::to_string(*departure) : "none") << ", MLE crossing " << crossing;
  o.require(worst_above <= 1e-3, "Rademacher lower curve = beta^2");
  o.require(departure && std::abs(*departure + 0.70) <= 0.02, "departure");
  o.require(std::abs(crossing + 0.84) <= 0.01, "MLE crossing");

  const auto sph = wishart_lower_curve(RateFunction::spherical(), nz, 1e-6);
  double worst_sph = 0;
  for (const auto& p : sph) worst_sph = std::max(worst_sph, std::abs(p.gamma - p.beta * p.beta));
  o.detail << ", spherical max |gap| " << worst_sph;
  o.require(worst_sph <= 1e-3, "spherical lower curve");
  return o;
}

Outcome mle_desk() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.command = "detect";
  cfg.format = "jsonl";
  cfg.model = ModelKind::wish;
  cfg.prior = "rademacher";
  cfg.detector = "mle";
  cfg.betas = {-0.9};
  cfg.gamma = 0.95;
  cfg.ns = {18};
  cfg.trials = 50;
  cfg.seed = 2024;
  cfg.out = scratch("mle.jsonl");
  std::ostringstream log;
  const auto s = cmd_detect(cfg, log);
  o.detail << "type I " << s.type1.errors << "/50, type II " << s.type2.errors << "/50, total error "
           << s.total_error() << ", epsilon " << s.params.value("epsilon", 0.0);
  o.require(s.total_error() <= 0.10, "total error <= 10%");
  return o;
}

Outcome properties() {
  Outcome o;
  int checks = 0;
  auto req = [&](bool ok, const std::string& what) {
    ++checks;
    o.require(ok, what);
  };
  // F endpoints and strict monotonicity in t.
  for (double beta : {-0.95, -0.5, 0.5, 2.0}) {
    req(F_nc(beta, 0.0) == 0.0, "F(beta,0)");
    req(std::abs(F_nc(beta, 1.0) - 0.5 * (beta - std::log1p(beta))) < 1e-12, "F(beta,1)");
    double prev = 0;
    bool inc = true;
    for (int i = 1; i <= 2000; ++i) {
      const double f = F_nc(beta, i / 2000.0);
      inc = inc && f > prev;
      prev = f;
    }
    req(inc, "F increasing in t");
  }
  std::vector<double> bs, ts;
  for (int i = 1; i < 100; ++i) bs.push_back(-1 + 0.05 * i);
  for (int i = 1; i < 20; ++i) ts.push_back(0.05 * i);
  const auto mono = monotonicity_check_F(bs, ts);
  req(mono.ok, "F/beta^2 decreasing and beta -> -1 limit");
  // Rate functions.
  for (const auto& rate : {RateFunction::spherical(), RateFunction::rademacher(), RateFunction::sparse_rademacher(0.2)}) {
    req(rate(0.0) == 0.0, rate.name + " at 0");
    double prev = 0;
    bool nondec = true;
    for (int i = 1; i < 1000; ++i) {
      const double f = rate(i / 1000.0);
      nondec = nondec && f >= prev;
      prev = f;
    }
    req(nondec, rate.name + " non-decreasing");
  }
  // Translation function and Fisher information.
  const NoiseModel g = NoiseModel::standard_gaussian();
  const NoiseModel b = NoiseModel::bimodal();
  for (auto [x, y] : {std::pair{0.3, -0.7}, std::pair{1.1, 0.4}, std::pair{-0.5, -0.2}}) {
    req(std::abs(translation_fn(g, x, y) - x * y) < 1e-8, "tau Gaussian");
    req(std::abs(translation_fn(b, x, y) - translation_fn(b, y, x)) < 1e-10, "tau symmetric");
  }
  req(std::abs(fisher_information(g) - 1) < 1e-9, "F_P Gaussian");
  const double fp = fisher_information(b);
  const double t = b.integration_halfwidth();
  const double ef = numerics::integrate([&](double w) { return b.score_derivative(w) * b.density(w); }, -t, t).value;
  req(std::abs(ef - fp) < 1e-8 * fp, "E[f'] = F_P");
  // Chernoff bound dominates Monte Carlo tails.
  for (auto [z, k] : {std::pair{0.5, 100}, std::pair{2.0, 50}}) {
    std::mt19937_64 gen(7);
    std::chi_squared_distribution<double> chi(k);
    const int draws = 2000000;
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      const double x = chi(gen);
      hits += z < 1 ? x < z * k : x > z * k;
    }
    const double p = static_cast<double>(hits) / draws;
    o.detail << "chi2 tail(" << z << "," << k << ") " << p << " <= " << chi2_chernoff(z, k) << "; ";
    req(p <= chi2_chernoff(z, k), "Chernoff dominates");
  }
  // power_bound on the two-valued likelihood ratio.
  double worst = 0;
  for (double alpha : {0.05, 0.2, 0.5}) {
    for (double beta2 = 0.0; beta2 <= 1 - alpha; beta2 += 0.01) {
      const double s = (1 - beta2) * (1 - beta2) / alpha + beta2 * beta2 / (1 - alpha);
      worst = std::max(worst, std::abs(power_bound(s, alpha) - beta2));
    }
  }
  req(worst < 1e-9, "power_bound tight");
  o.detail << checks << " checks, power_bound worst gap " << worst;
  return o;
}

Outcome point_mass() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.command = "detect";
  cfg.format = "jsonl";
  cfg.model = ModelKind::wig;
  cfg.noise = "discrete:-1@0.5,1@0.5";
  cfg.prior = "rademacher";
  cfg.detector = "point-mass";
  cfg.lambdas = {0.2};
  cfg.ns = {400};
  cfg.trials = 20;
  cfg.seed = 8;
  cfg.out = scratch("pm.jsonl");
  std::ostringstream log;
  const auto s = cmd_detect(cfg, log);
  o.detail << "errors " << s.type1.errors + s.type2.errors << "/40";
  o.require(s.type1.errors + s.type2.errors == 0, "zero errors");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 BBP and Wigner edges", bbp_edges},
      {"2 pre-transformed PCA outlier", figure1},
      {"3 second-moment limit", second_moment},
      {"4 rho* and sigma*", rho_star_check},
      {"5 phase diagram crossovers", figure3},
      {"6 MLE detector at desk scale", mle_desk},
      {"7 property suites", properties},
      {"8 point-mass test", point_mass},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  (" << secs << " s)  " << o.detail.str()
              << std::endl;
  }
  std::cout << failures << " of " << criteria.size() << " criteria failed" << std::endl;
  return strict ? failures : 0;
}
