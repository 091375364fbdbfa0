#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "twowave/generator.hpp"

namespace twowave {

/// Closed-form initial displacements and velocities. u, y live on (0, L0);
/// phi, psi on (L0, L). The w chain is u|phi, the s chain y|psi.
struct InitialProfiles {
  Profile u, y, phi, psi;
  Profile u_t, y_t, phi_t, psi_t;
};

/// All eight profiles identically zero.
InitialProfiles zero_profiles();

/// u0 = sin^3(pi x / L0), psi0 = sin^3(pi (x - L0) / (L - L0)), everything
/// else zero. Lies in D(A): vanishes to third order at 0, L0 and L, so the
/// interface and flux conditions hold trivially.
InitialProfiles default_profiles(const ValidatedConfig& cfg);

/// Nodal interpolation onto the two chains. BoundaryMismatch when a profile
/// does not vanish at its Dirichlet end, InterfaceMismatch when the left and
/// right pieces disagree at L0.
StateVector project_initial_data(const Mesh& mesh, const ValidatedConfig& cfg,
                                 const InitialProfiles& profiles);

/// Implicit midpoint rule (I - dt/2 A_h) U+ = (I + dt/2 A_h) U, factored once.
/// With tau = dt/2 and U = (p, q) the step reduces to the 2n system
///   (Mb + tau C + tau^2 K) q+ = (Mb - tau C - tau^2 K) q - 2 tau K p,
///   p+ = p + tau (q + q+).
/// A negative dt steps backwards.
class MidpointStepper {
 public:
  MidpointStepper(const GeneratorOperator& gen, double dt);

  double dt() const { return dt_; }
  StateVector step(const StateVector& u) const;
  /// |E(U+) - E(U) + dt q_mid^T (D1 + D2) q_mid| for the w-chain midpoint velocity.
  double balance_residual(const StateVector& u, const StateVector& next) const;

 private:
  const GeneratorOperator* gen_;
  double dt_;
  SparseMatrix rhs_q_;  // Mb - tau C - tau^2 K
  SparseMatrix damping_w_;
  std::shared_ptr<const Eigen::SparseLU<SparseMatrix>> lu_;
};

/// One step; dt must be positive.
StateVector step_midpoint(const GeneratorOperator& gen, const StateVector& u, double dt);

/// Which instants of the run are recorded. t = 0 and t = T always are.
struct SampleSchedule {
  enum class Kind { uniform, geometric };
  Kind kind = Kind::uniform;
  double every = 1.0;   // uniform spacing
  double start = 1.0;   // first positive geometric sample
  double ratio = 1.05;  // geometric growth factor

  static SampleSchedule uniform_every(double every);
  static SampleSchedule geometric_from(double start, double ratio);
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  /// Largest per-step balance residual since the previous sample.
  std::vector<double> balance_residuals;
  double initial_graph_norm = 0.0;
  std::string config_tag;
  double max_balance_residual = 0.0;
  /// Largest relative increase E(t+dt) / E(t) - 1 over all steps.
  double max_energy_increase = 0.0;
  std::size_t steps = 0;
};

using SampleCallback = std::function<void(double t, const StateVector& u)>;

/// Integrates U' = A_h U from U0 to T with the midpoint rule.
EnergyTrace simulate(const GeneratorOperator& gen, const StateVector& u0, double dt, double T,
                     const SampleSchedule& schedule, const SampleCallback& on_sample = {});

/// "a2=1" or "a2!=1".
std::string regime_tag(Regime r);

}  // namespace twowave
