#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckqr::cli {

enum class Command
{
  fit,
  process,
  density,
  efficient,
  mc
};

//! Bad flags or flag values; maps to exit code 2.
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  Command command = Command::fit;
  std::optional<std::string> data_path;
  double tau = 0.5;
  std::optional<std::vector<double>> taus;
  std::string kernel = "gaussian2";
  //! Empty when --bandwidth was not given.
  std::string bandwidth;
  std::string estimator = "ckqr";
  std::vector<std::string> estimators{ "mr", "smr", "ckmr" };
  std::optional<std::vector<double>> x;
  std::optional<std::string> design;
  std::optional<long> n;
  int reps = 1000;
  int bootstrap = 0;
  std::optional<long> m;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "-";
  //! Set by --help; run() prints nothing and returns 0.
  bool help_shown = false;
};

//! argv[0] is the program name. Throws UsageError.
RunConfig parse_args(int argc, const char* const* argv);
RunConfig parse_args(const std::vector<std::string>& args);

//! Executes the subcommand. Output goes to config.out ("-" = `out`),
//! diagnostics to `err`. Returns 0 on success, 1 on a computation error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

//! parse_args + run with exit-code mapping (usage errors give 2).
int main_entry(int argc, const char* const* argv);

//! "a:b:step" or a single value.
std::vector<double> parse_tau_grid(const std::string& text);

} // namespace ckqr::cli
