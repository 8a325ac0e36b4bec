#include "cli.hpp"

#include "ckqr/dataset.hpp"
#include "ckqr/design.hpp"
#include "ckqr/qr_exact.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ckqr;
using ckqr::cli::parse_args;
using ckqr::cli::RunConfig;
using ckqr::cli::UsageError;

namespace {

std::string
run_ok(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = cli::run(parse_args(args), out, err);
  REQUIRE_MESSAGE(code == 0, err.str());
  return out.str();
}

std::filesystem::path
temp_file(const std::string& name)
{
  return std::filesystem::temp_directory_path() / ("ckqr_test_" + name);
}

} // namespace

TEST_SUITE("cli")
{
  TEST_CASE("parsing")
  {
    const RunConfig fit = parse_args({ "fit", "--data", "d.csv", "--tau", "0.5", "--kernel", "gaussian2", "--bandwidth", "rot" });
    CHECK(fit.command == cli::Command::fit);
    CHECK(*fit.data_path == "d.csv");
    CHECK(fit.bandwidth == "rot");

    CHECK_THROWS_AS(parse_args({ "fit", "--data", "d.csv", "--tau", "1.5" }), UsageError);
    CHECK_THROWS_AS(parse_args({ "fit", "--data", "d.csv", "--kernel", "gaussian3" }), UsageError);
    CHECK_THROWS_AS(parse_args({ "fit", "--data", "d.csv", "--bogus" }), UsageError);
    CHECK_THROWS_AS(parse_args({ "fit", "--data", "d.csv", "--bandwidth", "oracle" }), UsageError);
    CHECK_THROWS_AS(parse_args({ "launch" }), UsageError);

    const RunConfig mc = parse_args({ "mc", "--design", "exponential", "--n", "100", "--reps", "5000", "--seed", "7" });
    CHECK(mc.command == cli::Command::mc);
    CHECK(*mc.n == 100);
    CHECK(mc.reps == 5000);
    CHECK(mc.seed == 7);
    CHECK(mc.bandwidth.empty());

    const auto g = cli::parse_tau_grid("0.01:0.99:0.01");
    CHECK(g.size() == 99);
    CHECK(g.back() == doctest::Approx(0.99));
    CHECK(cli::parse_tau_grid("0.3").size() == 1);
    CHECK_THROWS_AS(cli::parse_tau_grid("0.9:0.1:0.1"), UsageError);
  }

  TEST_CASE("fit emits JSON")
  {
    const auto path = temp_file("three.csv");
    {
      std::ofstream f(path);
      f << "y\n1\n2\n3\n";
    }
    for (const char* est : { "ckqr", "mr", "smr" }) {
      const auto j = nlohmann::json::parse(run_ok({ "fit", "--data", path.string(), "--estimator", est }));
      REQUIRE(j["beta"].size() == 1);
      CHECK(j["beta"][0].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("computation errors exit 1, usage errors 2")
  {
    std::ostringstream out, err;
    CHECK(cli::run(parse_args({ "fit", "--data", "/nonexistent/ckqr.csv" }), out, err) == 1);
    CHECK(err.str().find("ckqr: error") != std::string::npos);
    const char* argv[] = { "ckqr", "fit", "--tau", "2" };
    CHECK(cli::main_entry(4, argv) == 2);
  }

  TEST_CASE("mc output is reproducible")
  {
    const std::vector<std::string> base{ "mc", "--design", "gumbel", "--n", "80", "--reps", "1", "--seed", "3" };
    CHECK(run_ok(base) == run_ok(base));
    const std::vector<std::string> twelve{ "mc", "--design", "gumbel", "--n", "80", "--reps", "12", "--seed", "3" };
    auto four = twelve;
    four.insert(four.end(), { "--threads", "4" });
    auto one = twelve;
    one.insert(one.end(), { "--threads", "1" });
    CHECK(run_ok(four) == run_ok(one));

    const std::string rot = run_ok({ "mc", "--design", "t3", "--n", "80", "--reps", "4", "--bandwidth", "rot" });
    const std::string oracle = run_ok({ "mc", "--design", "exponential", "--n", "80", "--reps", "4", "--bandwidth", "oracle" });
    CHECK(rot.find("estimator") == 0);
    CHECK(std::count(oracle.begin(), oracle.end(), '\n') >= 3);
  }

  TEST_CASE("density on qr41 gives 99 rows")
  {
    const auto path = temp_file("qr41.csv");
    {
      std::ofstream f(path);
      write_dataset_csv(f, sample(DgpSpec::from_name("qr41", 200), 17));
    }
    const std::string csv = run_ok({ "density", "--data", path.string(), "--x", "1,0.9,0.5,0.9" });
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 100);

    const std::string proc = run_ok({ "process", "--data", path.string(), "--taus", "0.1:0.9:0.1" });
    CHECK(std::count(proc.begin(), proc.end(), '\n') == 10);
    std::filesystem::remove(path);
  }

  TEST_CASE("efficient subcommand")
  {
    const auto path = temp_file("het.csv");
    {
      std::ofstream f(path);
      write_dataset_csv(f, sample(DgpSpec::from_name("heteroskedastic", 600), 2));
    }
    const auto j = nlohmann::json::parse(run_ok({ "efficient", "--data", path.string(), "--seed", "4" }));
    CHECK(j["beta"].size() == 2);
    std::filesystem::remove(path);
  }

  TEST_CASE("written CSV reproduces the fit")
  {
    const Dataset data = sample(DgpSpec::from_name("chi2_3", 90), 8);
    const auto path = temp_file("round.csv");
    {
      std::ofstream f(path);
      write_dataset_csv(f, data);
    }
    const Dataset back = read_dataset_csv(path.string());
    CHECK(fit_exact(back, 0.35).beta == fit_exact(data, 0.35).beta);
    const auto j = nlohmann::json::parse(run_ok({ "fit", "--data", path.string(), "--estimator", "mr", "--tau", "0.35" }));
    CHECK(j["beta"][1].get<double>() == fit_exact(data, 0.35).beta(1));
    std::filesystem::remove(path);
  }
}
