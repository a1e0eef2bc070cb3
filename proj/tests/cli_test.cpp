#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "driftbound/cli.hpp"
#include "test_support.hpp"

namespace driftbound {
namespace {

namespace fs = std::filesystem;

const fs::path kData = DRIFTBOUND_TEST_DATA;

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "driftbound_cli_test.out";
  const std::string cmd =
      std::string(DRIFTBOUND_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(out);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST_CASE("check exit codes") {
  const Run ok = run_cli("check --params " + (kData / "baseline.json").string() + " --regime R");
  CHECK(ok.code == kExitOk);
  const auto verdict = nlohmann::json::parse(ok.out);
  CHECK(verdict["status"] == "WellPosed");
  CHECK(verdict["regime"] == "R");

  const Run bad =
      run_cli("check --params " + (kData / "baseline_theta05.json").string() + " --regime F");
  CHECK(bad.code == kExitNotGuaranteed);
  CHECK(nlohmann::json::parse(bad.out)["status"] == "NotGuaranteed");
}

TEST_CASE("region row count") {
  const Run r = run_cli("region --params " + (kData / "baseline.json").string() +
                        " --axis1 theta:-0.5:0.9:57 --axis2 T:0.05:2:40");
  CHECK(r.code == kExitOk);
  CHECK(count_lines(r.out) == 2280 + 1);
  CHECK(r.out.rfind("theta,T,status,reason,delta_psi,T_E,max_lambda\n", 0) == 0);
  CHECK(r.out.find('\r') == std::string::npos);
}

TEST_CASE("errors exit with code 2") {
  CHECK(run_cli("check --params /nonexistent.json").code == kExitError);
  CHECK(run_cli("bogus").code == kExitError);
  CHECK(run_cli("check --params " + (kData / "baseline.json").string() + " --regime G").code ==
        kExitError);
  CHECK(run_cli("bound --params " + (kData / "baseline.json").string() + " --format csv").code ==
        kExitError);
  CHECK(run_cli("region --params " + (kData / "baseline.json").string() +
                " --axis1 theta:0:1:3 --axis2 nope:0:1:3")
            .code == kExitError);
  CHECK(run_cli("--help").code == kExitOk);
}

TEST_CASE("output is written atomically to the requested path") {
  const fs::path target = fs::temp_directory_path() / "driftbound_cli_bound.json";
  fs::remove(target);
  const Run r = run_cli("bound --params " + (kData / "baseline.json").string() +
                        " --regime R --output " + target.string());
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream in(target);
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["bound"].get<double>() == doctest::Approx(8.4226053).epsilon(1e-7));
  for (const auto& entry : fs::directory_iterator(fs::temp_directory_path()))
    CHECK(entry.path().filename().string().find("driftbound_cli_bound.json.tmp") ==
          std::string::npos);
  fs::remove(target);
}

TEST_CASE("dispatch in process") {
  RunConfig config;
  config.subcommand = "riccati";
  config.params = kData / "baseline.json";
  config.steps = 100;
  std::ostringstream out, err;
  CHECK(dispatch(config, out, err) == kExitOk);
  CHECK(out.str().rfind("t,A_11,B_1,C\n", 0) == 0);
  CHECK(count_lines(out.str()) == 102);

  config.subcommand = "filter";
  config.regime = Regime::Z;
  std::ostringstream fout;
  CHECK(dispatch(config, fout, err) == kExitOk);
  // Three arrivals, each emitted as a left and a right row.
  CHECK(count_lines(fout.str()) == 1 + 101 + 3);
  CHECK(fout.str().find(",left\n") != std::string::npos);

  config.subcommand = "oracle";
  config.target = "gauss";
  config.n = 20000;
  std::ostringstream oout;
  CHECK(dispatch(config, oout, err) == kExitOk);
  const auto doc = nlohmann::json::parse(oout.str());
  CHECK(doc["analytic"].get<double>() == doctest::Approx(std::sqrt(2.0)));
  CHECK(doc["estimate"].contains("stderr"));

  config.subcommand = "check";
  config.params = kData / "missing.json";
  std::ostringstream eout, eerr;
  CHECK(dispatch(config, eout, eerr) == kExitError);
  CHECK_FALSE(eerr.str().empty());
}

TEST_CASE("json key order is stable") {
  const Verdict v = check_partial(testing::baseline(), Regime::R);
  const std::string s = verdict_json(v).dump();
  CHECK(s.find("\"status\"") < s.find("\"reason\""));
  CHECK(s.find("\"reason\"") < s.find("\"regime\""));
  CHECK(s.find("\"regime\"") < s.find("\"details\""));
}

TEST_CASE("region CSV round trip") {
  const RegionGrid grid = region_sweep(testing::baseline(), parse_axis("theta:-0.5:0.9:15"),
                                       parse_axis("q0:0.01:0.6:11"), Regime::R, 0, 1);
  std::ostringstream os;
  write_region_csv(os, grid);
  std::istringstream is(os.str());
  const RegionGrid back = read_region_csv(is);
  CHECK(back.axis1.name == "theta");
  CHECK(back.axis2.name == "q0");
  CHECK(back.axis1.values == grid.axis1.values);
  CHECK(back.axis2.values == grid.axis2.values);
  REQUIRE(back.cells.size() == grid.cells.size());
  for (std::size_t k = 0; k < grid.cells.size(); ++k) CHECK(back.cells[k] == grid.cells[k]);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_number(x)) == x);
}

}  // namespace
}  // namespace driftbound
