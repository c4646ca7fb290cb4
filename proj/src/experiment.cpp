#include "spikelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include "spikelab/detail/text.hpp"
#include "spikelab/eigensolver.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"
#include "spikelab/noise.hpp"
#include "spikelab/numerics.hpp"

namespace spikelab {

namespace {

using io::format_number;

// Writes to cfg.out, or to stdout when it is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

bool discrete_noise(const std::string& noise) { return noise.starts_with("discrete:"); }

std::vector<Atom> parse_discrete_noise(const std::string& noise) {
  return SpikePrior::parse("atoms:" + noise.substr(9)).atom_law();
}

double first_or_zero(const std::vector<double>& v) { return v.empty() ? 0.0 : v.front(); }

std::size_t single_n(const ExperimentConfig& cfg) {
  if (cfg.ns.size() != 1) throw ConfigError("this command takes a single --n");
  return cfg.ns.front();
}

double required_gamma(const ExperimentConfig& cfg) {
  if (!cfg.gamma) throw ConfigError("the Wishart model needs --gamma");
  if (!(*cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  return *cfg.gamma;
}

// Runs body(i) for i in [0, count) over contiguous chunks, one thread per worker.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = count * w / workers; i < count * (w + 1) / workers; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Histogram make_histogram(const Eigen::VectorXd& values, double lo, double hi, int bins) {
  Histogram h{lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0)};
  const double width = (hi - lo) / bins;
  for (double v : values) {
    auto b = static_cast<long>(std::floor((v - lo) / width));
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::filesystem::path sibling(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  const std::string ext = p.extension().string();
  p.replace_filename(p.stem().string() + suffix + (ext.empty() ? ".csv" : ext));
  return p;
}

void write_gnuplot(const std::string& script, const std::string& kind, const std::string& data) {
  if (script.empty()) return;
  std::ofstream out(script);
  if (!out) throw ConfigError("cannot open " + script + " for writing");
  out << "set datafile separator ','\nset key top left\n";
  if (kind == "phase") {
    out << "set xlabel 'beta'\nset ylabel 'gamma'\n"
        << "plot '" << data << "' skip 2 using 1:2 with lines title 'PCA (beta^2)', \\\n"
        << "     '' skip 2 using 1:3 with lines title 'lower bound', \\\n"
        << "     '' skip 2 using 1:4 with lines title 'MLE'\n";
  } else if (kind == "spectrum") {
    out << "set style fill solid 0.5\nset xlabel 'eigenvalue'\n"
        << "plot '" << data << "' skip 2 using (($2+$3)/2):(strcol(1) eq 'before' ? $4 : 1/0) with boxes title 'before', \\\n"
        << "     '' skip 2 using (($2+$3)/2):(strcol(1) eq 'after' ? $4 : 1/0) with boxes title 'after'\n";
  } else {
    out << "set logscale y\nplot '" << data << "' skip 2 using 1:5:6 with yerrorbars title 'estimate', \\\n"
        << "     '' skip 2 using 1:10 with lines title 'limit'\n";
  }
}

std::optional<SymmetricMatrixSample> draw(const ExperimentConfig& cfg, bool spiked, std::uint64_t seed,
                                          std::size_t n) {
  const SpikePrior prior = SpikePrior::parse(cfg.prior);
  switch (cfg.model) {
    case ModelKind::gwig:
      return sample_gwig(spiked ? first_or_zero(cfg.lambdas) : 0.0, prior, n, seed);
    case ModelKind::wig: {
      const double lambda = spiked ? first_or_zero(cfg.lambdas) : 0.0;
      if (discrete_noise(cfg.noise)) return sample_wig_discrete_noise(lambda, parse_discrete_noise(cfg.noise), prior, n, seed);
      return sample_wig(lambda, NoiseModel::parse(cfg.noise), prior, n, seed);
    }
    case ModelKind::wish:
      return sample_wishart(required_gamma(cfg), spiked ? first_or_zero(cfg.betas) : 0.0, prior, n, seed);
  }
  return std::nullopt;
}

std::vector<double> default_phase_betas() { return parse_sweep("-0.99:0.01:1.5"); }

std::optional<double> support_log_count(const SpikePrior& prior) {
  switch (prior.kind()) {
    case SpikePrior::Kind::spherical:
      return std::nullopt;
    case SpikePrior::Kind::sparse_rademacher:
      return prior.rho() == 1.0 ? std::log(2.0) : sparse_support_log_count(prior.rho());
    case SpikePrior::Kind::iid_atoms:
      return std::log(static_cast<double>(prior.atom_law().size()));
  }
  return std::nullopt;
}

RateFunction choose_rate(const ExperimentConfig& cfg, const SpikePrior& prior) {
  if (!cfg.rate.empty()) return RateFunction::parse(cfg.rate);
  if (auto r = default_rate(prior)) return *r;
  throw ConfigError("prior '" + cfg.prior +
                    "' has no built-in rate function; choose one with --rate (sph, rad, sparse:<rho>, largebeta:<atoms>)");
}

double lambda_star_of(const SpikePrior& prior) {
  if (prior.kind() == SpikePrior::Kind::spherical || prior.is_rademacher()) return 1.0;
  if (prior.atom_law().size() > 4) return std::numeric_limits<double>::quiet_NaN();
  return conditioning_lambda_bar(prior.atom_law());
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["model"] = to_string(model);
  j["prior"] = prior;
  j["noise"] = noise;
  j["lambda"] = lambdas;
  j["beta"] = betas;
  j["gamma"] = gamma ? nlohmann::json(*gamma) : nlohmann::json();
  j["n"] = ns;
  j["trials"] = trials;
  j["seed"] = seed;
  j["workers"] = workers;
  j["format"] = format;
  if (command == "detect") {
    j["detector"] = detector;
    j["margin"] = margin ? nlohmann::json(*margin) : nlohmann::json();
    j["epsilon"] = epsilon ? nlohmann::json(*epsilon) : nlohmann::json();
    j["atom"] = atom ? nlohmann::json(*atom) : nlohmann::json();
    j["timing"] = timing;
  }
  if (command == "spectrum") {
    j["bins"] = bins;
    j["top_k"] = top_k;
  }
  if (command == "phase" || command == "thresholds") {
    j["rate"] = rate;
    j["tolerance"] = tolerance;
    j["departure"] = departure;
    j["grid"] = grid;
  }
  if (command == "rho-star") j["tolerance"] = tolerance;
  return j;
}

std::vector<double> parse_sweep(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw ConfigError("sweep must be lo:step:hi, got '" + std::string(text) + "'");
    const double lo = detail::parse_double(parts[0], "sweep start");
    const double step = detail::parse_double(parts[1], "sweep step");
    const double hi = detail::parse_double(parts[2], "sweep end");
    if (!(step > 0.0) || hi < lo) throw ConfigError("sweep needs step > 0 and hi >= lo");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1000000) throw ConfigError("sweep has too many points");
    for (long i = 0; i <= count; ++i) {
      // Rounded so 0.01-style steps print cleanly.
      out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
  }
  for (auto part : detail::split(text, ',')) out.push_back(detail::parse_double(part, "sweep value"));
  return out;
}

double pca_edge_scale(ModelKind kind, double gamma) {
  if (kind != ModelKind::wish) return 1.0;
  const double r = std::sqrt(gamma);
  return r * std::pow(1.0 + r, 4.0 / 3.0);
}

std::uint64_t trial_seed(std::uint64_t master, unsigned arm, std::size_t trial) {
  return Stream::derive(master, arm, trial)();
}

SpectrumResult cmd_spectrum(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.bins < 1) throw ConfigError("--bins must be positive");
  const std::size_t n = single_n(cfg);
  const bool spiked = cfg.model == ModelKind::wish ? first_or_zero(cfg.betas) != 0.0 : first_or_zero(cfg.lambdas) != 0.0;
  const auto sample = draw(cfg, spiked, cfg.seed, n);
  if (!sample) throw NumericError("the Wishart sampler returned the failure event for this seed");

  SpectrumResult result;
  SpectrumStage before;
  before.name = "before";
  const double scale = sample->root_n_scaled ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
  before.eigenvalues = spectrum(sample->entries * scale);
  before.bulk_edge = cfg.model == ModelKind::wish ? std::pow(1.0 + std::sqrt(sample->model.gamma), 2) : 2.0;
  result.stages.push_back(std::move(before));
  if (cfg.model == ModelKind::wig && !discrete_noise(cfg.noise)) {
    const NoiseModel noise = NoiseModel::parse(cfg.noise);
    if (!noise.is_gaussian()) {
      SpectrumStage after;
      after.name = "after";
      after.eigenvalues = spectrum(pretransform(*sample, noise).entries);
      after.bulk_edge = 2.0 * std::sqrt(fisher_information(noise));
      result.stages.push_back(std::move(after));
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : result.stages) {
    lo = std::min(lo, s.eigenvalues.minCoeff());
    hi = std::max(hi, s.eigenvalues.maxCoeff());
  }
  const double pad = 0.02 * (hi - lo);
  for (auto& s : result.stages) s.histogram = make_histogram(s.eigenvalues, lo - pad, hi + pad, cfg.bins);

  {
    Sink sink(cfg.out);
    io::CsvWriter csv(sink.stream(), io::csv_schema("spectrum_histogram"), cfg.to_json());
    for (const auto& s : result.stages) {
      const double w = s.histogram.bin_width();
      for (std::size_t b = 0; b < s.histogram.counts.size(); ++b) {
        csv.row({s.name, format_number(s.histogram.lo + w * b), format_number(s.histogram.lo + w * (b + 1)),
                 std::to_string(s.histogram.counts[b])});
      }
    }
  }
  {
    Sink sink(cfg.out.empty() || cfg.out == "-" ? cfg.out : sibling(cfg.out, "_top").string());
    io::CsvWriter csv(sink.stream(), io::csv_schema("spectrum_top"), cfg.to_json());
    for (const auto& s : result.stages) {
      const auto m = s.eigenvalues.size();
      for (int k = 0; k < cfg.top_k && k < m; ++k) {
        csv.row({s.name, std::to_string(k + 1), format_number(s.eigenvalues(m - 1 - k)), format_number(s.bulk_edge)});
      }
    }
  }
  for (const auto& s : result.stages) {
    log << s.name << ": lambda_max = " << s.eigenvalues.maxCoeff() << ", bulk edge = " << s.bulk_edge << '\n';
  }
  write_gnuplot(cfg.gnuplot, "spectrum", cfg.out);
  return result;
}

std::pair<double, double> ErrorRate::wilson() const {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double m = static_cast<double>(trials);
  const double p = rate();
  const double denom = 1.0 + z * z / m;
  const double center = (p + z * z / (2.0 * m)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / m + z * z / (4.0 * m * m)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

DetectSummary cmd_detect(const ExperimentConfig& cfg, std::ostream& log) {
  const std::size_t n = single_n(cfg);
  if (cfg.trials == 0) throw ConfigError("--trials must be positive");
  const SpikePrior prior = SpikePrior::parse(cfg.prior);
  DetectSummary summary;
  summary.detector = cfg.detector;

  std::function<DetectionReport(const SymmetricMatrixSample&)> run;
  if (cfg.detector == "pca") {
    if (cfg.model == ModelKind::wish) required_gamma(cfg);
    const bool negative = cfg.model == ModelKind::wish && first_or_zero(cfg.betas) < 0.0;
    run = [&cfg, n, negative](const SymmetricMatrixSample& s) {
      const double margin = cfg.margin.value_or(default_pca_margin(n, pca_edge_scale(cfg.model, s.model.gamma)));
      return pca_test(s, margin, negative);
    };
    summary.params["negative_spike_mode"] = negative;
  } else if (cfg.detector == "transform-pca") {
    if (cfg.model != ModelKind::wig || discrete_noise(cfg.noise)) {
      throw ConfigError("transform-pca needs --model wig with a continuous noise law");
    }
    const NoiseModel noise = NoiseModel::parse(cfg.noise);
    const double fisher = fisher_information(noise);
    const double margin = cfg.margin.value_or(default_pca_margin(n, std::sqrt(fisher)));
    summary.params["fisher_information"] = fisher;
    summary.params["margin"] = margin;
    run = [noise, fisher, margin](const SymmetricMatrixSample& s) {
      return pretransformed_pca_test(s, noise, margin, fisher);
    };
  } else if (cfg.detector == "mle") {
    if (cfg.model != ModelKind::wish) throw ConfigError("the MLE detector is for --model wish");
    if (!prior.is_rademacher()) throw ConfigError("the MLE detector enumerates the Rademacher support only");
    const double beta = first_or_zero(cfg.betas);
    const double gamma_hat = static_cast<double>(n) / static_cast<double>(wishart_sample_count(n, required_gamma(cfg)));
    double eps = 0.0;
    if (cfg.epsilon) {
      eps = *cfg.epsilon;
    } else {
      const auto interval = mle_epsilon_interval(gamma_hat, std::log(2.0), beta);
      if (!interval) {
        throw ConfigError("no feasible epsilon: 2 gamma log 2 >= beta - log(1 + beta) at gamma = " +
                          format_number(gamma_hat));
      }
      eps = interval->midpoint();
      summary.params["epsilon_interval"] = {interval->lo, interval->hi};
      log << "epsilon interval (" << interval->lo << ", " << interval->hi << "), using midpoint " << eps << '\n';
    }
    summary.params["epsilon"] = eps;
    summary.params["gamma_actual"] = gamma_hat;
    const auto support = SupportEnumerator::rademacher(n);
    run = [support, beta, eps](const SymmetricMatrixSample& s) { return mle_wishart_test(s, support, beta, eps); };
  } else if (cfg.detector == "point-mass") {
    if (cfg.model != ModelKind::wig || !discrete_noise(cfg.noise)) {
      throw ConfigError("the point-mass test needs --model wig with --noise discrete:<atoms>");
    }
    const auto atoms = parse_discrete_noise(cfg.noise);
    const double c = cfg.atom.value_or(atoms.front().value);
    const auto it = std::find_if(atoms.begin(), atoms.end(), [c](const Atom& a) { return a.value == c; });
    if (it == atoms.end()) throw ConfigError("--atom is not an atom of the noise law");
    const double m = it->prob;
    const double eps = cfg.epsilon.value_or(0.2 * m);
    summary.params["atom"] = c;
    summary.params["mass"] = m;
    summary.params["epsilon"] = eps;
    run = [c, m, eps](const SymmetricMatrixSample& s) {
      if (!s.root_n_scaled) throw ConfigError("the point-mass test needs entries on the sqrt(n) Y scale");
      return point_mass_test(s.entries, c, m, eps);
    };
  } else {
    throw ConfigError("unknown detector '" + cfg.detector + "' (pca, transform-pca, mle, point-mass)");
  }

  // Arm 0 is unspiked, arm 1 spiked; trial seeds do not depend on the worker count.
  std::vector<DetectionReport> reports(2 * cfg.trials);
  std::vector<std::uint64_t> seeds(2 * cfg.trials);
  parallel_for(2 * cfg.trials, cfg.workers, [&](std::size_t i) {
    const unsigned arm = i < cfg.trials ? 0 : 1;
    const std::size_t t = i % cfg.trials;
    seeds[i] = trial_seed(cfg.seed, arm, t);
    const auto sample = draw(cfg, arm == 1, seeds[i], n);
    if (!sample) {
      DetectionReport r;
      r.detector = cfg.detector;
      r.decision = Decision::spiked;
      r.params = {{"failure", true}};
      reports[i] = r;
      return;
    }
    reports[i] = run(*sample);
  });

  Sink sink(cfg.out);
  io::JsonlWriter jsonl(sink.stream(), "detect", cfg.to_json());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const bool spiked_arm = i >= cfg.trials;
    const DetectionReport& r = reports[i];
    nlohmann::json j = to_json(r);
    j["seed"] = seeds[i];
    j["truth"] = spiked_arm ? "spiked" : "unspiked";
    if (!cfg.timing) j["wall_ms"] = nullptr;
    jsonl.record(j);
    if (spiked_arm) {
      ++summary.type2.trials;
      summary.type2.errors += r.decision == Decision::unspiked;
      summary.spiked.push_back(r);
    } else {
      ++summary.type1.trials;
      summary.type1.errors += r.decision == Decision::spiked;
      summary.unspiked.push_back(r);
    }
  }
  const auto ci1 = summary.type1.wilson();
  const auto ci2 = summary.type2.wilson();
  jsonl.summary({{"detector", cfg.detector},
                 {"params", summary.params},
                 {"trials_unspiked", summary.type1.trials},
                 {"trials_spiked", summary.type2.trials},
                 {"type1", summary.type1.rate()},
                 {"type1_ci95", {ci1.first, ci1.second}},
                 {"type2", summary.type2.rate()},
                 {"type2_ci95", {ci2.first, ci2.second}},
                 {"total_error", summary.total_error()}});
  log << cfg.detector << ": type I " << summary.type1.errors << "/" << summary.type1.trials << ", type II "
      << summary.type2.errors << "/" << summary.type2.trials << ", total error " << summary.total_error() << '\n';
  return summary;
}

PhaseResult cmd_phase(const ExperimentConfig& cfg, std::ostream& log) {
  const SpikePrior prior = SpikePrior::parse(cfg.prior);
  const RateFunction rate = choose_rate(cfg, prior);
  const std::vector<double> betas = cfg.betas.size() == 1 && cfg.betas[0] == 0.0 ? default_phase_betas() : cfg.betas;

  PhaseResult result;
  result.rate = rate.name;
  result.log_c = support_log_count(prior);
  if (!rate.note.empty()) log << "rate " << rate.name << ": " << rate.note << '\n';

  std::vector<double> nonzero;
  for (double b : betas)
    if (b != 0.0) nonzero.push_back(b);
  std::vector<PhasePoint> lower(nonzero.size());
  // Each beta is independent; split them over the workers.
  parallel_for(nonzero.size(), cfg.workers, [&](std::size_t i) {
    lower[i] = wishart_lower_curve(rate, {nonzero[i]}, cfg.tolerance, cfg.grid).front();
  });
  std::vector<PhasePoint> mle;
  if (result.log_c) mle = mle_upper_curve(*result.log_c, nonzero);

  std::size_t k = 0;
  for (double b : betas) {
    PhaseRow row;
    row.beta = b;
    if (b == 0.0) {
      row.gamma_lower = 0.0;
      if (result.log_c) row.gamma_mle = 0.0;
    } else {
      row.gamma_lower = lower[k].gamma;
      if (result.log_c) row.gamma_mle = mle[k].gamma;
      ++k;
    }
    if (cfg.gamma) {
      row.verdict = classify_phase(b, *cfg.gamma, *row.gamma_lower,
                                   row.gamma_mle.value_or(-std::numeric_limits<double>::infinity()));
    }
    result.rows.push_back(row);
  }

  std::vector<const PhaseRow*> descending;
  for (const auto& r : result.rows) descending.push_back(&r);
  std::sort(descending.begin(), descending.end(), [](auto* a, auto* b) { return a->beta > b->beta; });
  for (const PhaseRow* r : descending) {
    if (*r->gamma_lower - r->beta * r->beta > cfg.departure) {
      result.departure_beta = r->beta;
      break;
    }
  }
  if (result.log_c && *result.log_c > 0.25) result.mle_crossing = mle_pca_crossing(*result.log_c);

  Sink sink(cfg.out);
  nlohmann::json config = cfg.to_json();
  config["rate"] = rate.name;
  if (!rate.note.empty()) config["rate_note"] = rate.note;
  io::CsvWriter csv(sink.stream(), io::csv_schema("phase"), config);
  for (const auto& r : result.rows) {
    csv.row({format_number(r.beta), format_number(r.beta * r.beta), opt_number(r.gamma_lower),
             opt_number(r.gamma_mle), r.verdict ? to_string(*r.verdict) : "none"});
  }
  if (result.departure_beta) log << "lower curve departs from beta^2 at beta = " << *result.departure_beta << '\n';
  if (result.mle_crossing) log << "MLE curve meets beta^2 at beta = " << *result.mle_crossing << '\n';
  write_gnuplot(cfg.gnuplot, "phase", cfg.out);
  return result;
}

std::vector<MomentRow> cmd_moment(const ExperimentConfig& cfg, std::ostream& log) {
  const SpikePrior prior = SpikePrior::parse(cfg.prior);
  std::vector<MomentRow> rows;
  for (std::size_t n : cfg.ns) {
    if (cfg.model == ModelKind::wish) {
      const double gamma = required_gamma(cfg);
      for (double beta : cfg.betas) {
        MomentRow row;
        row.parameter = beta;
        row.gamma = gamma;
        row.n = n;
        row.estimate = wishart_second_moment_mc(beta, gamma, prior, n, cfg.trials, cfg.seed, cfg.workers);
        if (beta * beta < gamma) row.limit = 1.0 / std::sqrt(1.0 - beta * beta / gamma);
        rows.push_back(row);
      }
    } else if (cfg.model == ModelKind::gwig) {
      for (double lambda : cfg.lambdas) {
        MomentRow row;
        row.parameter = lambda;
        row.n = n;
        row.estimate = gwig_second_moment_mc(lambda, prior, n, cfg.trials, cfg.seed, cfg.workers);
        if (prior.kind() == SpikePrior::Kind::spherical && n >= 3 && 0.5 * n * lambda * lambda <= 700.0) {
          row.exact = gwig_second_moment_spherical_exact(lambda, n);
        }
        if (lambda < 1.0) row.limit = second_moment_limit(lambda);
        rows.push_back(row);
      }
    } else {
      throw ConfigError("second moments are available for --model gwig and --model wish");
    }
  }
  Sink sink(cfg.out);
  io::CsvWriter csv(sink.stream(), io::csv_schema("moment"), cfg.to_json());
  for (const auto& r : rows) {
    csv.row({format_number(r.parameter), opt_number(r.gamma), std::to_string(r.n), std::to_string(r.estimate.trials),
             format_number(r.estimate.value), format_number(r.estimate.std_error),
             std::to_string(r.estimate.diverged_count), format_number(r.estimate.top1pct_mass), opt_number(r.exact),
             opt_number(r.limit)});
    if (r.estimate.heavy_tail) {
      log << "warning: at parameter " << r.parameter << ", n = " << r.n << " the top 1% of terms carry "
          << r.estimate.top1pct_mass << " of the mass; the estimate is unreliable\n";
    }
    if (r.estimate.diverged) log << "warning: " << r.estimate.diverged_count << " singular terms excluded\n";
  }
  write_gnuplot(cfg.gnuplot, "moment", cfg.out);
  return rows;
}

RhoStarResult cmd_rho_star(const ExperimentConfig& cfg, std::ostream& log) {
  RhoStarResult r{rho_star(cfg.tolerance), cfg.tolerance};
  Sink sink(cfg.out);
  io::CsvWriter csv(sink.stream(), io::csv_schema("rho_star"), cfg.to_json());
  csv.row({format_number(r.rho_star), format_number(r.tolerance), format_number(r.rho_star - 0.5 * r.tolerance),
           format_number(r.rho_star + 0.5 * r.tolerance)});
  log << "rho* = " << r.rho_star << " +- " << 0.5 * r.tolerance << '\n';
  return r;
}

std::vector<std::pair<std::string, double>> cmd_thresholds(const ExperimentConfig& cfg, std::ostream& log) {
  const SpikePrior prior = SpikePrior::parse(cfg.prior);
  std::vector<std::pair<std::string, double>> q;
  const double lambda_star = lambda_star_of(prior);
  q.emplace_back("lambda_star", lambda_star);
  q.emplace_back("sigma_star", subgaussian_sigma_star(prior));
  if (!discrete_noise(cfg.noise)) {
    const NoiseModel noise = NoiseModel::parse(cfg.noise);
    const double fisher = fisher_information(noise);
    q.emplace_back("fisher_information", fisher);
    if (std::isfinite(lambda_star)) {
      const auto t = nongaussian_thresholds_from_fisher(fisher, lambda_star);
      q.emplace_back("nongaussian_lower", t.lower);
      q.emplace_back("nongaussian_upper", t.upper);
    }
  }
  const double beta = first_or_zero(cfg.betas);
  if (cfg.gamma && std::isfinite(lambda_star)) q.emplace_back("crude_wishart_beta_bound", wigner_wishart_crude_bound(lambda_star, *cfg.gamma));
  if (beta != 0.0) {
    q.emplace_back("pca_gamma", beta * beta);
    if (beta > 0.0) q.emplace_back("subgaussian_wishart_gamma", subgaussian_wishart_bound(q[1].second, beta));
    if (const auto log_c = support_log_count(prior)) q.emplace_back("mle_gamma", mle_upper_curve(*log_c, {beta}).front().gamma);
    if (!cfg.rate.empty() || default_rate(prior)) {
      const RateFunction rate = choose_rate(cfg, prior);
      q.emplace_back("lower_bound_gamma", wishart_lower_curve(rate, {beta}, cfg.tolerance, cfg.grid).front().gamma);
    }
  }
  Sink sink(cfg.out);
  io::CsvWriter csv(sink.stream(), io::csv_schema("thresholds"), cfg.to_json());
  for (const auto& [name, value] : q) {
    csv.row({name, format_number(value)});
    log << name << " = " << value << '\n';
  }
  return q;
}

}  // namespace spikelab
