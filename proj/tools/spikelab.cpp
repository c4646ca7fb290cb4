#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spikelab/errors.hpp"
#include "spikelab/experiment.hpp"
#include "spikelab/io.hpp"

namespace {

using spikelab::ExperimentConfig;

struct RawOptions {
  std::string model = "gwig";
  std::string lambda = "0";
  std::string beta = "0";
  std::string n = "200";
  double gamma = 0.0;
  double margin = 0.0;
  double epsilon = 0.0;
  double atom = 0.0;
  std::string format;
};

void add_model_options(CLI::App* app, ExperimentConfig& cfg, RawOptions& raw) {
  app->add_option("--model", raw.model, "gwig, wig or wish")->check(CLI::IsMember({"gwig", "wig", "wish"}));
  app->add_option("--prior", cfg.prior, "spherical, rademacher, sparse:<rho>, atoms:v@p,...");
  app->add_option("--noise", cfg.noise, "gaussian, bimodal, mix:w@m@s,... or discrete:v@p,...");
  app->add_option("--lambda", raw.lambda, "Wigner signal strength; list a,b,c or lo:step:hi");
  app->add_option("--beta", raw.beta, "Wishart spike strength; list a,b,c or lo:step:hi");
  app->add_option("--gamma", raw.gamma, "Wishart aspect ratio n/N");
  app->add_option("--n", raw.n, "dimension; a list is accepted by moment");
}

void add_run_options(CLI::App* app, ExperimentConfig& cfg) {
  app->add_option("--trials", cfg.trials, "trials (per arm for detect)");
  app->add_option("--seed", cfg.seed, "master seed");
  app->add_option("--workers", cfg.workers, "worker threads")->check(CLI::Range(1u, 256u));
}

void add_output_options(CLI::App* app, ExperimentConfig& cfg, RawOptions& raw) {
  app->add_option("--out", cfg.out, "output path (stdout when omitted)");
  app->add_option("--format", raw.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

std::vector<std::size_t> parse_ns(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : spikelab::parse_sweep(text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw spikelab::ConfigError("--n values must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiked Wigner and Wishart models: sampling, detection and thresholds"};
  app.set_version_flag("--version", spikelab::io::tool_version());
  app.require_subcommand(1);

  ExperimentConfig cfg;
  RawOptions raw;
  std::string validate_path;

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue histogram and top eigenvalues of one sample");
  add_model_options(spectrum, cfg, raw);
  add_run_options(spectrum, cfg);
  add_output_options(spectrum, cfg, raw);
  spectrum->add_option("--bins", cfg.bins, "histogram bins");
  spectrum->add_option("--top", cfg.top_k, "number of top eigenvalues");
  spectrum->add_option("--gnuplot", cfg.gnuplot, "also write a gnuplot script here");

  auto* detect = app.add_subcommand("detect", "run a detector over spiked and unspiked trials");
  add_model_options(detect, cfg, raw);
  add_run_options(detect, cfg);
  add_output_options(detect, cfg, raw);
  detect->add_option("--detector", cfg.detector, "pca, transform-pca, mle or point-mass")
      ->check(CLI::IsMember({"pca", "transform-pca", "mle", "point-mass"}));
  auto* margin = detect->add_option("--margin", raw.margin, "PCA margin (default 4 n^{-2/3} times the edge scale)");
  auto* epsilon = detect->add_option("--epsilon", raw.epsilon, "MLE or point-mass epsilon");
  auto* atom = detect->add_option("--atom", raw.atom, "point-mass atom c (default: the first atom)");
  detect->add_flag("--timing", cfg.timing, "record wall-clock time per trial (output is then not reproducible)");

  auto* phase = app.add_subcommand("phase", "Wishart phase diagram: lower-bound, MLE and PCA curves");
  add_model_options(phase, cfg, raw);
  add_run_options(phase, cfg);
  add_output_options(phase, cfg, raw);
  phase->add_option("--rate", cfg.rate, "rate function: sph, rad, sparse:<rho>, largebeta:<atoms>");
  phase->add_option("--tolerance", cfg.tolerance, "bisection tolerance on gamma");
  phase->add_option("--departure", cfg.departure, "gap above beta^2 that counts as a departure (default 0)");
  phase->add_option("--grid", cfg.grid, "t grid size of the lower-bound check");
  phase->add_option("--gnuplot", cfg.gnuplot, "also write a gnuplot script here");

  auto* moment = app.add_subcommand("moment", "Monte Carlo second moments");
  add_model_options(moment, cfg, raw);
  add_run_options(moment, cfg);
  add_output_options(moment, cfg, raw);
  moment->add_option("--gnuplot", cfg.gnuplot, "also write a gnuplot script here");

  auto* rho = app.add_subcommand("rho-star", "critical sparsity of the conditioning method");
  add_output_options(rho, cfg, raw);
  rho->add_option("--tolerance", cfg.tolerance, "bisection tolerance (>= 1e-4)");

  auto* thresholds = app.add_subcommand("thresholds", "scalar thresholds for a prior and noise");
  add_model_options(thresholds, cfg, raw);
  add_output_options(thresholds, cfg, raw);
  thresholds->add_option("--rate", cfg.rate, "rate function for the lower bound");
  thresholds->add_option("--tolerance", cfg.tolerance, "bisection tolerance on gamma");

  auto* validate = app.add_subcommand("validate", "check a CSV or JSON-lines artifact against its schema");
  validate->add_option("file", validate_path, "artifact to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const auto r = spikelab::io::validate_file(validate_path);
      for (const auto& e : r.errors) std::cerr << validate_path << ": " << e << '\n';
      std::cerr << validate_path << ": schema " << r.schema << ", " << r.records << " records, "
                << (r.ok ? "valid" : "invalid") << '\n';
      return r.ok ? 0 : 2;
    }
    cfg.model = spikelab::parse_model_kind(raw.model);
    cfg.lambdas = spikelab::parse_sweep(raw.lambda);
    cfg.betas = spikelab::parse_sweep(raw.beta);
    cfg.ns = parse_ns(raw.n);
    if (raw.gamma != 0.0) cfg.gamma = raw.gamma;
    if (*margin) cfg.margin = raw.margin;
    if (*epsilon) cfg.epsilon = raw.epsilon;
    if (*atom) cfg.atom = raw.atom;

    const bool jsonl = static_cast<bool>(*detect);
    cfg.format = raw.format.empty() ? (jsonl ? "jsonl" : "csv") : raw.format;
    if (cfg.format != (jsonl ? "jsonl" : "csv")) {
      throw spikelab::ConfigError(std::string("this subcommand writes ") + (jsonl ? "jsonl" : "csv"));
    }

    auto& log = std::cerr;
    if (*spectrum) {
      cfg.command = "spectrum";
      spikelab::cmd_spectrum(cfg, log);
    } else if (*detect) {
      cfg.command = "detect";
      spikelab::cmd_detect(cfg, log);
    } else if (*phase) {
      cfg.command = "phase";
      spikelab::cmd_phase(cfg, log);
    } else if (*moment) {
      cfg.command = "moment";
      spikelab::cmd_moment(cfg, log);
    } else if (*rho) {
      cfg.command = "rho-star";
      spikelab::cmd_rho_star(cfg, log);
    } else if (*thresholds) {
      cfg.command = "thresholds";
      spikelab::cmd_thresholds(cfg, log);
    }
  } catch (const spikelab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const spikelab::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
