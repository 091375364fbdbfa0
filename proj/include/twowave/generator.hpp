#pragma once

#include <memory>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "twowave/config.hpp"
#include "twowave/mesh.hpp"

namespace twowave {

enum class Regime { a2_equal_1, a2_not_1 };

/// Discrete semigroup generator A_h on the energy space.
///
/// With K = [[S_w, C1], [C1, S_s]], Mb = diag(M, M) and
/// C = [[D1 + D2, C2], [-C2, 0]], the action on U = (p, q) is
///   A_h U = (q, -Mb^{-1} (K p + C q)).
/// The antisymmetric C2 blocks carry the velocity coupling and are
/// energy-neutral; only D1 + D2 dissipates.
///
/// Immutable after construction. All member functions are const and may be
/// called concurrently.
class GeneratorOperator {
 public:
  GeneratorOperator(const ValidatedConfig& cfg, double h_target);
  GeneratorOperator(const ValidatedConfig& cfg, Mesh mesh);

  const ValidatedConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return mesh_; }
  const SystemMatrices& matrices() const { return mats_; }
  const GramMatrix& gram() const { return gram_; }
  Regime regime() const { return regime_; }
  double mesh_h() const { return mesh_.max_element_size(); }
  Index chain_size() const { return mats_.n; }
  Index state_size() const { return 4 * mats_.n; }

  /// 2n x 2n blocks of the second-order form Mb p'' + C p' + K p = 0.
  const SparseMatrix& stiffness_block() const { return stiffness_; }
  const SparseMatrix& velocity_block() const { return velocity_; }
  const SparseMatrix& mass_block() const { return mass_; }
  /// True when C == 0 (no damping, no velocity coupling).
  bool conservative() const { return velocity_.nonZeros() == 0; }

  StateVector apply(const StateVector& u) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;

  /// Energy inner product <U, V>_H = U^T H V.
  double inner(const StateVector& u, const StateVector& v) const;
  double norm(const StateVector& u) const;
  std::complex<double> inner(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;
  double norm(const Eigen::VectorXcd& u) const;

  /// Solves -A_h U = F. Velocities come out as -F_p; positions from the
  /// 4n block system [[0, -I], [K, C]] (p, q) = (F_p, Mb F_q).
  StateVector static_solve(const StateVector& f) const;

  /// M^{-1} rhs for one chain.
  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;

 private:
  void check(const StateVector& u) const;

  ValidatedConfig cfg_;
  Mesh mesh_;
  SystemMatrices mats_;
  GramMatrix gram_;
  Regime regime_;
  SparseMatrix stiffness_;
  SparseMatrix velocity_;
  SparseMatrix mass_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> mass_solver_;
  std::shared_ptr<const Eigen::SparseLU<SparseMatrix>> static_solver_;
};

/// (Re <A_h U, U>_H, -q_w^T (D1 + D2) q_w). The two agree to roundoff.
std::pair<double, double> dissipation_identity(const GeneratorOperator& gen, const StateVector& u);

/// sqrt(||U||_H^2 + ||A_h U||_H^2).
double graph_norm(const GeneratorOperator& gen, const StateVector& u);

/// ||A_h U + F||_H / ||F||_H (0 when F == 0 and U == 0).
double static_residual(const GeneratorOperator& gen, const StateVector& u, const StateVector& f);

/// Static transmission problem with a known solution: w = g / a with
/// a w = x (x - L0) (x^2 - L^2), s = sin(pi x / L). Both satisfy the Dirichlet,
/// continuity and flux conditions; f_w, f_s are the matching loads of
/// -(a w')' + c1 s and -s'' + c1 w.
struct StaticProblem {
  Profile w, s, f_w, f_s;
};

StaticProblem manufactured_static_problem(const ValidatedConfig& cfg);

/// Forcing F with F_p = 0 and F_q = Mb^{-1} b, b the Gauss-quadrature load
/// vectors of f_w and f_s. static_solve(F) is then the Galerkin solution.
StateVector load_forcing(const GeneratorOperator& gen, const Profile& f_w, const Profile& f_s);

/// a1 u_h'(L0-) - a2 phi_h'(L0+) from the two elements touching L0.
double interface_flux_jump(const GeneratorOperator& gen, const StateVector& u);

}  // namespace twowave
