#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twowave {

/// One CLI invocation. Unset optionals fall back to per-verb defaults.
struct Command {
  std::string verb;  // validate, spectrum, resolvent, simulate, decay, static-solve, poincare, regimes
  std::optional<std::filesystem::path> config_path;  // built-in defaults when absent
  std::filesystem::path output_dir = "out";
  std::vector<std::string> overrides;                // key=value

  double h = 0.01;
  double dt = 0.01;
  std::optional<double> T;  // 200 for a2 == 1, T_poly otherwise
  double T_poly = 1e5;
  double sample_every = 1.0;       // uniform sampling when a2 == 1
  double geometric_start = 10.0;   // geometric sampling otherwise
  double geometric_ratio = 1.05;

  double lambda_min = 1.0;
  std::optional<double> lambda_max;  // 50, or the frequency cutoff for a2 != 1 in `regimes`
  int lambda_points = 400;

  std::optional<double> near;  // spectrum: iterative mode around i*near
  int count = 10;              // spectrum: eigenvalues in iterative mode
  bool snapshots = false;
  bool export_matrices = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFinding = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command, writing results under output_dir and a summary to out.
/// 0 on success, 1 when an invariant check fails, 2 on usage or config errors.
int run_command(const Command& cmd, std::ostream& out, std::ostream& err);

}  // namespace twowave
