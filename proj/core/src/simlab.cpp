#include "ckqr/simlab.hpp"

#include "ckqr/density_eff.hpp"
#include "ckqr/horowitz.hpp"
#include "ckqr/inference.hpp"
#include "ckqr/parallel.hpp"
#include "ckqr/qr_exact.hpp"
#include "ckqr/qr_smooth.hpp"
#include "ckqr/rng.hpp"
#include "ckqr/special.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace ckqr {

std::vector<double>
h_grid_default()
{
  std::vector<double> out;
  for (int k = 4; k <= 40; ++k) {
    out.push_back(static_cast<double>(k * 2) / 100.0);
  }
  return out;
}

const McCell*
McReport::find(const std::string& estimator, double tau, bool is_rot, double h) const
{
  for (const auto& c : cells) {
    if (c.estimator == estimator && std::abs(c.tau - tau) < 1e-12 && c.is_rot == is_rot &&
        (is_rot || c.estimator == "mr" || std::abs(c.h - h) < 1e-12)) {
      return &c;
    }
  }
  return nullptr;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Slot
{
  none, // MR
  fixed,
  rot,
  oracle
};

struct CellKey
{
  std::string estimator;
  size_t tau_idx;
  Slot slot;
  double h; // fixed or oracle bandwidth
  bool reported;
};

struct Record
{
  double est = kNaN;
  double se = kNaN;
  double h = kNaN;
  bool ok = false;
};

bool
wants(const McConfig& cfg, const char* name)
{
  return std::find(cfg.estimators.begin(), cfg.estimators.end(), name) != cfg.estimators.end();
}

struct Plan
{
  std::vector<CellKey> cells;
  std::vector<size_t> mr_cell; // per tau
};

Plan
make_plan(const McConfig& cfg, const std::vector<double>& oracle_h)
{
  Plan plan;
  for (size_t t = 0; t < cfg.taus.size(); ++t) {
    plan.mr_cell.push_back(plan.cells.size());
    plan.cells.push_back({ "mr", t, Slot::none, 0.0, wants(cfg, "mr") });
    for (const char* est : { "ckmr", "ckmr-naive-se", "smr" }) {
      if (!wants(cfg, est)) {
        continue;
      }
      for (double h : cfg.h_grid) {
        plan.cells.push_back({ est, t, Slot::fixed, h, true });
      }
      if (cfg.include_rot) {
        plan.cells.push_back({ est, t, Slot::rot, 0.0, true });
      }
      if (cfg.include_oracle) {
        plan.cells.push_back({ est, t, Slot::oracle, oracle_h[t], true });
      }
    }
    if (wants(cfg, "efficient")) {
      plan.cells.push_back({ "efficient", t, Slot::rot, 0.0, true });
    }
  }
  return plan;
}

void
validate(const McConfig& cfg)
{
  if (cfg.reps < 1) {
    fail(ErrorKind::invalid_argument, "reps must be at least 1");
  }
  if (cfg.taus.empty()) {
    fail(ErrorKind::invalid_argument, "no quantile levels given");
  }
  for (double tau : cfg.taus) {
    if (!(tau >= kTauMin && tau <= kTauMax)) {
      fail(ErrorKind::invalid_argument, "tau must lie in [0.01, 0.99]");
    }
  }
  for (double h : cfg.h_grid) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      fail(ErrorKind::invalid_argument, "bandwidths must be positive and finite");
    }
  }
  for (const auto& e : cfg.estimators) {
    if (std::find_if(std::begin(kMcEstimators), std::end(kMcEstimators), [&](const char* k) {
          return e == k;
        }) == std::end(kMcEstimators)) {
      fail(ErrorKind::invalid_argument, "unknown estimator '" + e + "'");
    }
  }
  if (cfg.estimators.empty()) {
    fail(ErrorKind::invalid_argument, "no estimators selected");
  }
  if (cfg.bootstrap_reps != 0 && cfg.bootstrap_reps < 100) {
    fail(ErrorKind::invalid_argument, "bootstrap replicates must be 0 or at least 100");
  }
  if (cfg.h_grid.empty() && !cfg.include_rot && !cfg.include_oracle &&
      (wants(cfg, "ckmr") || wants(cfg, "ckmr-naive-se") || wants(cfg, "smr"))) {
    fail(ErrorKind::invalid_argument, "smoothed estimators need at least one bandwidth");
  }
}

std::vector<Record>
replicate(const McConfig& cfg,
          const Plan& plan,
          const std::vector<double>& oracle_h,
          Eigen::Index coef,
          std::uint64_t r)
{
  std::vector<Record> rec(plan.cells.size());
  const Dataset data = sample(cfg.design, cfg.seed, r);
  const std::uint64_t rep_seed = stream_key(cfg.seed, r);

  for (size_t t = 0; t < cfg.taus.size(); ++t) {
    const double tau = cfg.taus[t];
    FitResult exact;
    try {
      exact = fit_exact(data, tau);
    } catch (const Error&) {
      continue; // every cell at this tau counts the failure
    }
    Record& mr = rec[plan.mr_cell[t]];
    mr.est = exact.beta(coef);
    mr.h = 0.0;
    mr.ok = true;
    if (cfg.bootstrap_reps > 0 && plan.cells[plan.mr_cell[t]].reported) {
      try {
        mr.se = pairs_bootstrap_se(data, tau, cfg.bootstrap_reps, rep_seed + t, 1)(coef);
      } catch (const Error&) {
        mr.ok = false;
      }
    }

    double h_rot = kNaN;
    try {
      h_rot = rule_of_thumb(data.residuals(exact.beta), data.n());
    } catch (const Error&) {
    }

    // Smoothed fits are shared between ckmr and ckmr-naive-se at a bandwidth.
    for (size_t c = 0; c < plan.cells.size(); ++c) {
      const CellKey& key = plan.cells[c];
      if (key.tau_idx != t || key.slot == Slot::none || key.estimator == "efficient") {
        continue;
      }
      const double h = key.slot == Slot::rot ? h_rot : (key.slot == Slot::oracle ? oracle_h[t] : key.h);
      if (!std::isfinite(h)) {
        continue;
      }
      const SmoothSpec spec{ cfg.kernel, h, tau };
      try {
        if (key.estimator == "smr") {
          const FitResult smooth = fit_smoothed(data, spec, exact.beta);
          const FitResult fit = fit_horowitz(data, spec, smooth.beta);
          const auto cov = horowitz_covariance(data, spec, fit);
          rec[c] = { fit.beta(coef), cov.se(coef), h, true };
        } else {
          const FitResult fit = fit_smoothed(data, spec, exact.beta);
          const auto cov = key.estimator == "ckmr" ? covariance(data, spec, fit)
                                                   : naive_covariance(data, spec, fit);
          rec[c] = { fit.beta(coef), cov.se(coef), h, true };
        }
      } catch (const Error&) {
      }
    }

    for (size_t c = 0; c < plan.cells.size(); ++c) {
      const CellKey& key = plan.cells[c];
      if (key.tau_idx != t || key.estimator != "efficient") {
        continue;
      }
      try {
        const auto eff =
          efficient_fit(data, tau, cfg.kernel, BandwidthRule::rot(), cfg.efficient_m, rep_seed + t);
        rec[c] = { eff.beta(coef), eff.se(coef), eff.h_stage1, true };
      } catch (const Error&) {
      }
    }
  }
  return rec;
}

struct Accumulator
{
  int ok = 0;
  double sum_d = 0.0;
  double sum_d2 = 0.0;
  int se_count = 0;
  double sum_se = 0.0;
  int hit95 = 0;
  int hit99 = 0;
  double sum_h = 0.0;
};

} // namespace

McReport
run_mc(const McConfig& cfg)
{
  validate(cfg);
  const Eigen::Index coef = cfg.design.dim() >= 2 ? 1 : 0;

  std::vector<double> oracle_h(cfg.taus.size(), kNaN);
  if (cfg.include_oracle) {
    const BandwidthRule rule = BandwidthRule::oracle(cfg.design);
    const Dataset probe = sample(cfg.design, cfg.seed, 0);
    for (size_t t = 0; t < cfg.taus.size(); ++t) {
      oracle_h[t] = resolve_bandwidth(rule, probe, cfg.taus[t], cfg.kernel);
    }
  }

  const Plan plan = make_plan(cfg, oracle_h);
  std::vector<double> truth;
  for (double tau : cfg.taus) {
    truth.push_back(true_beta(cfg.design, tau)(coef));
  }
  const double z95 = normal_quantile(0.975);
  const double z99 = normal_quantile(0.995);

  std::vector<Accumulator> acc(plan.cells.size());
  const size_t total = static_cast<size_t>(cfg.reps);
  const size_t chunk = 512;
  std::vector<std::vector<Record>> slots;
  for (size_t begin = 0; begin < total; begin += chunk) {
    const size_t count = std::min(chunk, total - begin);
    slots.assign(count, {});
    parallel_for(count, cfg.threads, [&](size_t i) {
      slots[i] = replicate(cfg, plan, oracle_h, coef, begin + i);
    });
    for (const auto& rec : slots) {
      for (size_t c = 0; c < rec.size(); ++c) {
        const Record& x = rec[c];
        if (!x.ok) {
          continue;
        }
        Accumulator& a = acc[c];
        const double d = x.est - truth[plan.cells[c].tau_idx];
        ++a.ok;
        a.sum_d += d;
        a.sum_d2 += d * d;
        a.sum_h += x.h;
        if (std::isfinite(x.se)) {
          ++a.se_count;
          a.sum_se += x.se;
          a.hit95 += std::abs(d) <= z95 * x.se ? 1 : 0;
          a.hit99 += std::abs(d) <= z99 * x.se ? 1 : 0;
        }
      }
    }
  }

  McReport report;
  report.reps = cfg.reps;
  report.seed = cfg.seed;
  report.coefficient = coef;
  if (wants(cfg, "smr")) {
    report.notes.emplace_back("smr standard errors use a kappa-sandwich approximation");
  }
  if (wants(cfg, "mr") && cfg.bootstrap_reps == 0) {
    report.notes.emplace_back("mr standard errors not computed (bootstrap_reps = 0)");
  }

  std::vector<double> mse(plan.cells.size(), kNaN);
  for (size_t c = 0; c < plan.cells.size(); ++c) {
    if (acc[c].ok > 0) {
      mse[c] = acc[c].sum_d2 / acc[c].ok;
    }
  }
  std::string worst;
  for (size_t c = 0; c < plan.cells.size(); ++c) {
    const CellKey& key = plan.cells[c];
    const Accumulator& a = acc[c];
    McCell cell;
    cell.estimator = key.estimator;
    cell.design = cfg.design.name();
    cell.n = cfg.design.n;
    cell.tau = cfg.taus[key.tau_idx];
    cell.is_rot = key.slot == Slot::rot;
    cell.h = key.slot == Slot::none ? 0.0 : (a.ok > 0 ? a.sum_h / a.ok : key.h);
    if (key.slot == Slot::fixed || key.slot == Slot::oracle) {
      cell.h = key.h;
    }
    cell.reps = cfg.reps;
    cell.fail_count = cfg.reps - a.ok;
    cell.mse = mse[c];
    cell.rmse_ratio = mse[c] / mse[plan.mr_cell[key.tau_idx]];
    if (a.ok > 0) {
      const double mean_d = a.sum_d / a.ok;
      cell.bias = mean_d;
      cell.mean_estimate = truth[key.tau_idx] + mean_d;
      cell.sd_estimates =
        a.ok > 1 ? std::sqrt(std::max(0.0, (a.sum_d2 - a.ok * mean_d * mean_d) / (a.ok - 1)))
                 : 0.0;
    } else {
      cell.bias = cell.mean_estimate = cell.sd_estimates = kNaN;
    }
    if (a.se_count > 0) {
      cell.mean_se = a.sum_se / a.se_count;
      cell.coverage95 = static_cast<double>(a.hit95) / a.se_count;
      cell.coverage99 = static_cast<double>(a.hit99) / a.se_count;
    } else {
      cell.mean_se = cell.coverage95 = cell.coverage99 = kNaN;
    }
    if (static_cast<double>(cell.fail_count) > cfg.max_fail_fraction * cfg.reps && worst.empty()) {
      worst = cell.estimator + " at tau=" + std::to_string(cell.tau) + " failed " +
              std::to_string(cell.fail_count) + " of " + std::to_string(cfg.reps) + " replications";
    }
    if (key.reported) {
      report.cells.push_back(std::move(cell));
    }
  }
  if (!worst.empty()) {
    fail(ErrorKind::too_many_failures, worst);
  }
  return report;
}

McReport
run_mc(const DgpSpec& dgp,
       const std::vector<std::string>& estimators,
       const std::vector<double>& h_grid,
       int reps,
       const std::vector<double>& taus,
       std::uint64_t seed,
       unsigned threads)
{
  McConfig cfg;
  cfg.design = dgp;
  cfg.estimators = estimators;
  cfg.h_grid = h_grid;
  cfg.reps = reps;
  cfg.taus = taus;
  cfg.seed = seed;
  cfg.threads = threads;
  return run_mc(cfg);
}

void
write_mc_csv(std::ostream& out, const McReport& report)
{
  out << "estimator,design,n,tau,h,is_rot,reps,rmse_ratio,mean_se,sd_estimates,coverage95,"
         "coverage99,fail_count\n";
  out << std::setprecision(10);
  for (const auto& c : report.cells) {
    out << c.estimator << ',' << c.design << ',' << c.n << ',' << c.tau << ',' << c.h << ','
        << (c.is_rot ? 1 : 0) << ',' << c.reps << ',' << c.rmse_ratio << ',' << c.mean_se << ','
        << c.sd_estimates << ',' << c.coverage95 << ',' << c.coverage99 << ',' << c.fail_count
        << '\n';
  }
}

} // namespace ckqr
