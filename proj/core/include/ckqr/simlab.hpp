#pragma once

#include "ckqr/bandwidth.hpp"
#include "ckqr/design.hpp"
#include "ckqr/kernels.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ckqr {

//! 0.08, 0.10, ..., 0.80 (37 values), built as k * 2 / 100.
std::vector<double> h_grid_default();

//! Estimator labels accepted by run_mc.
inline constexpr const char* kMcEstimators[] = { "mr", "smr", "ckmr", "ckmr-naive-se", "efficient" };

struct McConfig
{
  DgpSpec design;
  std::vector<std::string> estimators{ "mr", "smr", "ckmr" };
  std::vector<double> taus{ 0.5 };
  //! Fixed bandwidths; the smoothed estimators are fitted at each.
  std::vector<double> h_grid;
  //! Also fit at each replication's own h_ROT (cells flagged is_rot).
  bool include_rot = true;
  //! Also fit at the AMSE-optimal oracle bandwidth for the design.
  bool include_oracle = false;
  Kernel kernel = Kernel::gaussian(2);
  int reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  //! Pairs-bootstrap replicates for MR standard errors; 0 leaves MR without
  //! standard errors (coverage reported as NaN).
  int bootstrap_reps = 0;
  std::optional<Eigen::Index> efficient_m;
  //! run_mc throws too_many_failures when any cell exceeds this fraction.
  double max_fail_fraction = 0.01;
};

struct McCell
{
  std::string estimator;
  std::string design;
  Eigen::Index n = 0;
  double tau = 0.5;
  double h = 0.0; // 0 for MR; mean realized h for rot cells
  bool is_rot = false;
  int reps = 0;
  double rmse_ratio = 0.0; // MSE relative to MR at the same tau
  double mse = 0.0;
  double bias = 0.0;
  double mean_estimate = 0.0;
  double sd_estimates = 0.0;
  double mean_se = 0.0;
  double coverage95 = 0.0;
  double coverage99 = 0.0;
  int fail_count = 0;
};

struct McReport
{
  std::vector<McCell> cells;
  int reps = 0;
  std::uint64_t seed = 0;
  //! Coefficient the cells summarize (the slope when d >= 2).
  Eigen::Index coefficient = 0;
  //! Caveats, e.g. the smr standard errors being a kappa-sandwich.
  std::vector<std::string> notes;

  const McCell* find(const std::string& estimator, double tau, bool is_rot, double h = 0.0) const;
};

McReport run_mc(const McConfig& config);

//! Convenience form: all h_grid entries plus h_ROT, default kernel.
McReport run_mc(const DgpSpec& dgp,
                const std::vector<std::string>& estimators,
                const std::vector<double>& h_grid,
                int reps,
                const std::vector<double>& taus,
                std::uint64_t seed,
                unsigned threads = 1);

//! estimator, design, n, tau, h, is_rot, reps, rmse_ratio, mean_se,
//! sd_estimates, coverage95, coverage99, fail_count
void write_mc_csv(std::ostream& out, const McReport& report);

} // namespace ckqr
