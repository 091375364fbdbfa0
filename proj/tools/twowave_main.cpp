#include <iostream>

#include <CLI11.hpp>

#include "twowave/cli.hpp"

int main(int argc, char** argv) {
  twowave::Command cmd;
  CLI::App app{"Two-chain transmission problem: spectra, resolvent growth and energy decay"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");

  std::string config;
  std::string out = "out";
  double T = 0.0;
  double lambda_max = 0.0;
  double near = 0.0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file (built-in defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--set", cmd.overrides, "key=value override, repeatable");
    sub->add_option("--h", cmd.h, "target mesh size");
  };

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"validate", "check the config, print C0 and the coercivity margin"},
      {"spectrum", "eigenvalues of the discrete generator"},
      {"resolvent", "resolvent norm sweep along the imaginary axis"},
      {"simulate", "midpoint-rule energy trace"},
      {"decay", "energy trace plus decay classification"},
      {"static-solve", "manufactured static problem on three meshes"},
      {"poincare", "Poincare constant against its discrete value"},
      {"regimes", "a2 = 1 against a2 != 1, end to end"}};
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    if (name == "spectrum") {
      sub->add_option("--near", near, "iterative mode: eigenvalues closest to i*near");
      sub->add_option("--count", cmd.count, "eigenvalues in iterative mode");
    }
    if (name == "resolvent" || name == "regimes") {
      sub->add_option("--lambda-min", cmd.lambda_min, "lowest frequency");
      sub->add_option("--lambda-max", lambda_max, "highest frequency");
      sub->add_option("--lambda-points", cmd.lambda_points, "log-spaced grid points");
    }
    if (name == "simulate" || name == "decay" || name == "regimes") {
      sub->add_option("--dt", cmd.dt, "time step");
      sub->add_option("--T", T, "final time (200 for a2 = 1, --T-poly otherwise)");
      sub->add_option("--T-poly", cmd.T_poly, "default final time when a2 != 1");
      sub->add_option("--sample-every", cmd.sample_every, "uniform sample spacing (a2 = 1)");
      sub->add_option("--geometric-start", cmd.geometric_start, "first geometric sample (a2 != 1)");
      sub->add_option("--geometric-ratio", cmd.geometric_ratio, "geometric sample ratio");
      sub->add_flag("--snapshots", cmd.snapshots, "write nodal values at every sample");
    }
    if (name == "spectrum" || name == "resolvent" || name == "simulate" || name == "decay") {
      sub->add_flag("--export-matrices", cmd.export_matrices, "write assembled matrices as triplets");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : twowave::kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cmd.verb = sub->get_name();
  cmd.output_dir = out;
  if (!config.empty()) cmd.config_path = config;
  auto given = [sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--T")) cmd.T = T;
  if (given("--lambda-max")) cmd.lambda_max = lambda_max;
  if (given("--near")) cmd.near = near;
  return twowave::run_command(cmd, std::cout, std::cerr);
}
