#include "cli.hpp"

#include "ckqr/bandwidth.hpp"
#include "ckqr/density_eff.hpp"
#include "ckqr/horowitz.hpp"
#include "ckqr/inference.hpp"
#include "ckqr/parallel.hpp"
#include "ckqr/qr_exact.hpp"
#include "ckqr/qr_smooth.hpp"
#include "ckqr/simlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ckqr::cli {

namespace {

using json = nlohmann::ordered_json;

double
parse_double(std::string_view s, const std::string& what)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("cannot parse " + what + " value '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string>
split(const std::string& s, char sep)
{
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    parts.push_back(cur);
  }
  if (!s.empty() && s.back() == sep) {
    parts.emplace_back();
  }
  return parts;
}

int
log_level()
{
  const char* v = std::getenv("CKQR_LOG");
  if (v == nullptr) {
    return 0;
  }
  const std::string s(v);
  if (s == "debug" || s == "2") {
    return 2;
  }
  if (s == "info" || s == "1") {
    return 1;
  }
  return 0;
}

const char*
command_name(Command c)
{
  switch (c) {
    case Command::fit: return "fit";
    case Command::process: return "process";
    case Command::density: return "density";
    case Command::efficient: return "efficient";
    case Command::mc: return "mc";
  }
  return "?";
}

} // namespace

std::vector<double>
parse_tau_grid(const std::string& text)
{
  const auto parts = split(text, ':');
  if (parts.size() == 1) {
    return { parse_double(parts[0], "tau") };
  }
  if (parts.size() != 3) {
    throw UsageError("tau grid must look like a:b:step, got '" + text + "'");
  }
  const double a = parse_double(parts[0], "tau grid start");
  const double b = parse_double(parts[1], "tau grid end");
  const double step = parse_double(parts[2], "tau grid step");
  if (!(step > 0.0) || !(b >= a)) {
    throw UsageError("tau grid needs start <= end and a positive step");
  }
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= count; ++i) {
    out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

RunConfig
parse_args(int argc, const char* const* argv)
{
  RunConfig cfg;
  cfg.threads = default_threads();

  CLI::App app{ "Convolution-smoothed quantile regression toolkit", "ckqr" };
  app.require_subcommand(1);

  std::string tau_text;
  std::string taus_text;
  std::string x_text;
  std::string estimators_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--kernel", cfg.kernel, "gaussian2 | gaussian4 | gaussian6 | gaussian8");
    sub->add_option("--out", cfg.out, "output path, '-' for standard output");
    sub->add_option("--threads", cfg.threads, "worker threads");
    sub->add_option("--seed", cfg.seed, "random seed");
  };
  auto source = [&](CLI::App* sub) {
    sub->add_option("--data", cfg.data_path, "CSV with a 'y' column then covariates");
    sub->add_option("--design", cfg.design, "simulation design used when --data is absent");
    sub->add_option("--n", cfg.n, "sample size for --design");
  };

  auto* fit = app.add_subcommand("fit", "fit at one quantile level, JSON output");
  common(fit);
  source(fit);
  fit->add_option("--tau", tau_text, "quantile level in (0,1)");
  fit->add_option("--bandwidth", cfg.bandwidth, "rot | fixed:<h>");
  fit->add_option("--estimator", cfg.estimator, "ckqr | mr | smr");
  fit->add_option("--bootstrap", cfg.bootstrap, "pairs-bootstrap replicates for mr");

  auto* process = app.add_subcommand("process", "quantile process over a tau grid, CSV output");
  common(process);
  source(process);
  process->add_option("--taus", taus_text, "a:b:step");
  process->add_option("--bandwidth", cfg.bandwidth, "rot | fixed:<h>");

  auto* density = app.add_subcommand("density", "pdf-curve estimate at a covariate, CSV output");
  common(density);
  source(density);
  density->add_option("--taus", taus_text, "a:b:step");
  density->add_option("--bandwidth", cfg.bandwidth, "rot | fixed:<h>");
  density->add_option("--x", x_text, "comma-separated covariate (leading 1 optional)");

  auto* efficient = app.add_subcommand("efficient", "two-stage efficient estimator, JSON output");
  common(efficient);
  source(efficient);
  efficient->add_option("--tau", tau_text, "quantile level in (0,1)");
  efficient->add_option("--bandwidth", cfg.bandwidth, "rot | fixed:<h>");
  efficient->add_option("--m", cfg.m, "stage-1 sample size");

  auto* mc = app.add_subcommand("mc", "Monte Carlo experiment, CSV output");
  common(mc);
  mc->add_option("--design", cfg.design, "design name")->required();
  mc->add_option("--n", cfg.n, "sample size")->required();
  mc->add_option("--reps", cfg.reps, "replications");
  mc->add_option("--tau", tau_text, "quantile level");
  mc->add_option("--taus", taus_text, "a:b:step");
  mc->add_option("--bandwidth", cfg.bandwidth, "rot | fixed:<h> | oracle (default: grid and rot)");
  mc->add_option("--estimators", estimators_text, "comma list of mr,smr,ckmr,ckmr-naive-se,efficient");
  mc->add_option("--bootstrap", cfg.bootstrap, "pairs-bootstrap replicates for mr standard errors");
  mc->add_option("--m", cfg.m, "stage-1 size for the efficient estimator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    cfg.help_shown = true;
    return cfg;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    cfg.help_shown = true;
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "fit") {
    cfg.command = Command::fit;
  } else if (name == "process") {
    cfg.command = Command::process;
  } else if (name == "density") {
    cfg.command = Command::density;
  } else if (name == "efficient") {
    cfg.command = Command::efficient;
  } else {
    cfg.command = Command::mc;
  }

  if (!tau_text.empty()) {
    cfg.tau = parse_double(tau_text, "tau");
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw UsageError("--tau must lie in (0, 1)");
  }
  if (!taus_text.empty()) {
    cfg.taus = parse_tau_grid(taus_text);
    for (double t : *cfg.taus) {
      if (!(t > 0.0 && t < 1.0)) {
        throw UsageError("--taus values must lie in (0, 1)");
      }
    }
  }
  if (!x_text.empty()) {
    std::vector<double> x;
    for (const auto& part : split(x_text, ',')) {
      x.push_back(parse_double(part, "--x"));
    }
    cfg.x = x;
  }
  if (!estimators_text.empty()) {
    cfg.estimators = split(estimators_text, ',');
    for (const auto& e : cfg.estimators) {
      if (std::find_if(std::begin(kMcEstimators), std::end(kMcEstimators), [&](const char* k) {
            return e == k;
          }) == std::end(kMcEstimators)) {
        throw UsageError("unknown estimator '" + e + "'");
      }
    }
  }

  try {
    (void)Kernel::from_name(cfg.kernel);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!cfg.bandwidth.empty()) {
    BandwidthRule rule;
    try {
      rule = BandwidthRule::parse(cfg.bandwidth);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (rule.kind == BandwidthRule::Kind::optimal_oracle && cfg.command != Command::mc) {
      throw UsageError("--bandwidth oracle is only valid under mc with a named design");
    }
  }
  if (cfg.estimator != "ckqr" && cfg.estimator != "mr" && cfg.estimator != "smr") {
    throw UsageError("--estimator must be ckqr, mr or smr");
  }
  if (cfg.threads < 1) {
    throw UsageError("--threads must be at least 1");
  }
  if (cfg.reps < 1) {
    throw UsageError("--reps must be at least 1");
  }
  if (cfg.bootstrap != 0 && cfg.bootstrap < 100) {
    throw UsageError("--bootstrap needs at least 100 replicates");
  }
  if (cfg.m && *cfg.m < 2) {
    throw UsageError("--m must be at least 2");
  }

  if (cfg.command != Command::mc) {
    if (cfg.data_path && cfg.design) {
      throw UsageError("give either --data or --design, not both");
    }
    if (!cfg.data_path && !cfg.design) {
      throw UsageError("--data (or --design with --n) is required");
    }
    if (cfg.design && !cfg.n) {
      throw UsageError("--design needs --n");
    }
  }
  if (cfg.design) {
    try {
      (void)DgpSpec::from_name(*cfg.design, cfg.n.value_or(1000));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  return cfg;
}

RunConfig
parse_args(const std::vector<std::string>& args)
{
  std::vector<const char*> argv;
  argv.push_back("ckqr");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

namespace {

Dataset
load(const RunConfig& cfg)
{
  if (cfg.data_path) {
    return read_dataset_csv(*cfg.data_path);
  }
  return sample(DgpSpec::from_name(*cfg.design, *cfg.n), cfg.seed);
}

BandwidthRule
rule_of(const RunConfig& cfg)
{
  return cfg.bandwidth.empty() ? BandwidthRule::rot() : BandwidthRule::parse(cfg.bandwidth);
}

std::vector<double>
to_std(const Vector& v)
{
  return { v.data(), v.data() + v.size() };
}

json
interval_json(const FitResult& fit, const CovarianceEstimate& cov, double level)
{
  json out = json::array();
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    const auto ci = confidence_interval(fit, cov, k, level);
    out.push_back({ ci.lo, ci.hi });
  }
  return out;
}

void
emit_json(std::ostream& out, const json& j)
{
  out << j.dump(2) << '\n';
}

std::vector<double>
default_grid()
{
  return parse_tau_grid("0.01:0.99:0.01");
}

void
run_fit(const RunConfig& cfg, std::ostream& out, std::ostream& log, int level)
{
  const Dataset data = load(cfg);
  const Kernel kernel = Kernel::from_name(cfg.kernel);
  json j;
  j["estimator"] = cfg.estimator;
  j["tau"] = cfg.tau;
  j["names"] = data.names();

  if (cfg.estimator == "mr") {
    const FitResult fit = fit_exact(data, cfg.tau);
    j["beta"] = to_std(fit.beta);
    j["h"] = 0.0;
    j["objective"] = fit.objective;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    if (cfg.bootstrap > 0) {
      j["se"] = to_std(pairs_bootstrap_se(data, cfg.tau, cfg.bootstrap, cfg.seed, cfg.threads));
      j["se_method"] = "pairs bootstrap";
    }
    emit_json(out, j);
    return;
  }

  const double h = resolve_bandwidth(rule_of(cfg), data, cfg.tau, kernel);
  const SmoothSpec spec{ kernel, h, cfg.tau };
  FitResult fit;
  CovarianceEstimate cov;
  if (cfg.estimator == "smr") {
    fit = fit_horowitz(data, spec);
    cov = horowitz_covariance(data, spec, fit);
    j["se_method"] = "kappa-sandwich (approximation)";
  } else {
    fit = fit_smoothed(data, spec);
    cov = covariance(data, spec, fit);
    j["se_method"] = "sandwich";
  }
  if (level >= 2) {
    log << "ckqr: fit h=" << h << " iterations=" << fit.iterations << " |grad|=" << fit.grad_norm
        << '\n';
  }
  j["beta"] = to_std(fit.beta);
  j["se"] = to_std(cov.se);
  j["ci95"] = interval_json(fit, cov, 0.95);
  j["ci99"] = interval_json(fit, cov, 0.99);
  j["h"] = h;
  j["kernel"] = kernel.name();
  j["objective"] = fit.objective;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  emit_json(out, j);
}

void
run_process(const RunConfig& cfg, std::ostream& out)
{
  const Dataset data = load(cfg);
  const auto proc =
    fit_process(data, cfg.taus.value_or(default_grid()), Kernel::from_name(cfg.kernel), rule_of(cfg));
  write_process_csv(out, proc);
}

void
run_density(const RunConfig& cfg, std::ostream& out)
{
  const Dataset data = load(cfg);
  Vector x = data.x_mean();
  if (cfg.x) {
    const auto& v = *cfg.x;
    const auto d = data.d();
    if (static_cast<Eigen::Index>(v.size()) == d) {
      x = Eigen::Map<const Vector>(v.data(), d);
    } else if (static_cast<Eigen::Index>(v.size()) == d - 1) {
      x.resize(d);
      x(0) = 1.0;
      for (Eigen::Index k = 1; k < d; ++k) {
        x(k) = v[static_cast<size_t>(k - 1)];
      }
    } else {
      fail(ErrorKind::invalid_argument,
           "--x has " + std::to_string(v.size()) + " entries; the design has " +
             std::to_string(d) + " columns");
    }
  }
  const auto curve = pdf_curve(
    data, Kernel::from_name(cfg.kernel), rule_of(cfg), cfg.taus.value_or(default_grid()), x);
  write_pdf_curve_csv(out, curve);
}

void
run_efficient(const RunConfig& cfg, std::ostream& out)
{
  const Dataset data = load(cfg);
  std::optional<Eigen::Index> m;
  if (cfg.m) {
    m = static_cast<Eigen::Index>(*cfg.m);
  }
  const auto eff =
    efficient_fit(data, cfg.tau, Kernel::from_name(cfg.kernel), rule_of(cfg), m, cfg.seed);
  json j;
  j["estimator"] = "efficient";
  j["tau"] = cfg.tau;
  j["names"] = data.names();
  j["beta"] = to_std(eff.beta);
  j["se"] = to_std(eff.se);
  j["m"] = eff.m;
  j["clamped_count"] = eff.clamped_count;
  j["h_stage1"] = eff.h_stage1;
  emit_json(out, j);
}

void
run_mc_command(const RunConfig& cfg, std::ostream& out)
{
  McConfig mc;
  mc.design = DgpSpec::from_name(*cfg.design, *cfg.n);
  mc.estimators = cfg.estimators;
  mc.taus = cfg.taus.value_or(std::vector<double>{ cfg.tau });
  mc.kernel = Kernel::from_name(cfg.kernel);
  mc.reps = cfg.reps;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  mc.bootstrap_reps = cfg.bootstrap;
  if (cfg.m) {
    mc.efficient_m = static_cast<Eigen::Index>(*cfg.m);
  }
  if (cfg.bandwidth.empty()) {
    mc.h_grid = h_grid_default();
    mc.include_rot = true;
  } else {
    const BandwidthRule rule = BandwidthRule::parse(cfg.bandwidth);
    mc.include_rot = rule.kind == BandwidthRule::Kind::rule_of_thumb;
    mc.include_oracle = rule.kind == BandwidthRule::Kind::optimal_oracle;
    if (rule.kind == BandwidthRule::Kind::fixed) {
      mc.h_grid = { rule.value };
    }
  }
  write_mc_csv(out, run_mc(mc));
}

} // namespace

int
run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  if (cfg.help_shown) {
    return 0;
  }
  const int level = log_level();
  const auto start = std::chrono::steady_clock::now();
  try {
    std::ofstream file;
    std::ostream* sink = &out;
    if (cfg.out != "-") {
      file.open(cfg.out);
      if (!file) {
        fail(ErrorKind::io, "cannot open output file '" + cfg.out + "'");
      }
      sink = &file;
    }
    switch (cfg.command) {
      case Command::fit: run_fit(cfg, *sink, err, level); break;
      case Command::process: run_process(cfg, *sink); break;
      case Command::density: run_density(cfg, *sink); break;
      case Command::efficient: run_efficient(cfg, *sink); break;
      case Command::mc: run_mc_command(cfg, *sink); break;
    }
    if (file.is_open()) {
      file.close();
      if (!file) {
        fail(ErrorKind::io, "failed writing '" + cfg.out + "'");
      }
      std::cout << "ckqr " << command_name(cfg.command) << ": wrote " << cfg.out << '\n';
    }
  } catch (const Error& e) {
    err << "ckqr: error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  }
  if (level >= 1) {
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "ckqr: " << command_name(cfg.command) << " finished in " << secs << " s\n";
  }
  return 0;
}

int
main_entry(int argc, const char* const* argv)
{
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "ckqr: usage error: " << e.what() << "\n(run 'ckqr --help' for usage)\n";
    return 2;
  }
  return run(cfg, std::cout, std::cerr);
}

} // namespace ckqr::cli
