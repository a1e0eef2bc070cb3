#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "driftbound/cli.hpp"
#include "driftbound/error.hpp"

namespace {

void add_common(CLI::App* sub, driftbound::RunConfig& config, std::string& regime) {
  sub->add_option("--params", config.params, "Model parameter file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--regime", regime, "Information regime: R, J, Z or F")
      ->check(CLI::IsMember({"R", "J", "Z", "F"}));
  sub->add_option("--output", config.output, "Write the artifact here instead of stdout");
  sub->add_option("--steps", config.steps, "Number of integration steps")
      ->check(CLI::PositiveNumber);
  sub->add_option("--format", config.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", config.threads, "Worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-posedness checks and bounds for power utility under an OU drift"};
  app.require_subcommand(1, 1);

  driftbound::RunConfig config;
  std::string regime = "F";

  auto* check = app.add_subcommand("check", "Decide whether the problem is well posed");
  add_common(check, config, regime);

  auto* region = app.add_subcommand("region", "Map verdicts over a two-parameter grid");
  add_common(region, config, regime);
  region->add_option("--axis1", config.axis1, "name:lo:hi:count")->required();
  region->add_option("--axis2", config.axis2, "name:lo:hi:count")->required();

  auto* bound = app.add_subcommand("bound", "Value-function upper bound");
  add_common(bound, config, regime);

  auto* riccati = app.add_subcommand("riccati", "Dump the Riccati solution (t, A, B, C)");
  add_common(riccati, config, regime);

  auto* filter = app.add_subcommand("filter", "Dump the conditional covariance path");
  add_common(filter, config, regime);

  auto* oracle = app.add_subcommand("oracle", "Monte Carlo check of an analytic value");
  add_common(oracle, config, regime);
  oracle->add_option("--target", config.target, "d, gauss or utility")
      ->check(CLI::IsMember({"d", "gauss", "utility"}));
  oracle->add_option("--n", config.n, "Number of paths or samples")->check(CLI::PositiveNumber);
  oracle->add_option("--dt", config.dt, "Simulation time step")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", config.seed, "Base seed");
  oracle->add_option("--pi", config.pi, "Constant strategy for --target utility");
  oracle->add_option("--m", config.m, "Initial drift for --target d");
  oracle->add_option("--gauss-spec", config.gauss_spec, "JSON with mu_Y, Sigma_Y, U, b")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? driftbound::kExitOk : driftbound::kExitError;
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  try {
    config.regime = driftbound::parse_regime(regime);
  } catch (const driftbound::Error& e) {
    std::cerr << e.what() << '\n';
    return driftbound::kExitError;
  }
  return driftbound::dispatch(config, std::cout, std::cerr);
}
