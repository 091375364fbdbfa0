#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "twowave/config.hpp"

namespace twowave {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Profile = std::function<double(double)>;

/// Coefficient values on one element. Meshes are aligned with every
/// breakpoint, so these are exact element constants.
struct ElementCoefficients {
  double a = 0.0;  // a1 left of L0, a2 right of it
  double d1 = 0.0;
  double c1 = 0.0;
  double d2 = 0.0;
  double c2 = 0.0;
};

struct Mesh {
  std::vector<double> nodes;                  // ascending, nodes.front() == 0, nodes.back() == L
  std::vector<ElementCoefficients> elements;  // elements[e] spans [nodes[e], nodes[e+1]]
  std::size_t interface_index = 0;            // nodes[interface_index] == L0

  std::size_t element_count() const { return elements.size(); }
  /// Degrees of freedom per chain: every node except the two Dirichlet ends.
  Index dofs() const { return static_cast<Index>(nodes.size()) - 2; }
  /// Interior DOF index of the shared interface node.
  Index interface_dof() const { return static_cast<Index>(interface_index) - 1; }
  double max_element_size() const;
  /// Positions of the interior DOFs.
  Eigen::VectorXd dof_positions() const;
};

/// Breakpoint-aligned mesh of (0, L): each segment between consecutive
/// breakpoints {0, alpha, L0, beta, L} is split uniformly into
/// ceil(length / h_target) elements (at least one).
/// Throws InvalidArgument for h_target <= 0 and HTooCoarse for h_target > L.
Mesh build_mesh(const ValidatedConfig& cfg, double h_target);

/// P1 matrices on the interior DOFs (Dirichlet ends eliminated). The same
/// node set carries both chains, so every matrix is n x n.
struct SystemMatrices {
  Index n = 0;
  SparseMatrix mass;         // int phi_i phi_j
  SparseMatrix stiffness_w;  // int a(x) phi_i' phi_j'
  SparseMatrix stiffness_s;  // int phi_i' phi_j'
  SparseMatrix coupling_c1;  // int c1(x) phi_i phi_j
  SparseMatrix coupling_c2;  // int c2(x) phi_i phi_j
  SparseMatrix damping_d1;   // int d1(x) phi_i phi_j
  SparseMatrix damping_d2;   // int d2(x) phi_i phi_j
};

SystemMatrices assemble_matrices(const Mesh& mesh, const ValidatedConfig& cfg);

/// Discrete state (p_w, p_s, q_w, q_s) stored contiguously. p_w holds u on
/// the left part of the mesh and phi on the right, sharing the interface DOF;
/// p_s does the same for y and psi. q_* are the matching velocities.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Index n) : n_(n), data_(Eigen::VectorXd::Zero(4 * n)) {}
  StateVector(Index n, Eigen::VectorXd data);

  Index chain_size() const { return n_; }
  Index size() const { return data_.size(); }

  auto p_w() { return data_.segment(0, n_); }
  auto p_s() { return data_.segment(n_, n_); }
  auto q_w() { return data_.segment(2 * n_, n_); }
  auto q_s() { return data_.segment(3 * n_, n_); }
  auto p_w() const { return data_.segment(0, n_); }
  auto p_s() const { return data_.segment(n_, n_); }
  auto q_w() const { return data_.segment(2 * n_, n_); }
  auto q_s() const { return data_.segment(3 * n_, n_); }
  auto positions() const { return data_.segment(0, 2 * n_); }
  auto velocities() const { return data_.segment(2 * n_, 2 * n_); }

  const Eigen::VectorXd& vector() const { return data_; }
  Eigen::VectorXd& vector() { return data_; }

 private:
  Index n_ = 0;
  Eigen::VectorXd data_;
};

/// Energy Gram matrix H of the state space: position block
/// [[S_w, C1], [C1, S_s]], velocity block diag(M, M). ||U||_H^2 = U^T H U.
class GramMatrix {
 public:
  const SparseMatrix& matrix() const { return h_; }
  Index dimension() const { return h_.rows(); }

 private:
  friend GramMatrix energy_gram(const SystemMatrices& mats);
  SparseMatrix h_;
};

/// Builds H and checks it is positive definite by a sparse Cholesky
/// factorization; IndefiniteGram if that fails.
GramMatrix energy_gram(const SystemMatrices& mats);

/// Position-block quadratic form p^T [[S_w, C1], [C1, S_s]] p.
double potential_form(const SystemMatrices& mats, const StateVector& u);
/// E = 1/2 U^T H U.
double energy(const SystemMatrices& mats, const StateVector& u);

/// L2 norm over (0, L) of (interpolant of the DOF values) - exact, by
/// three-point Gauss quadrature on every element.
double l2_error(const Mesh& mesh, const Eigen::VectorXd& dofs, const Profile& exact);

/// 1 / mu_1 for the P1 Dirichlet Laplacian on a uniform mesh of (0, L0)
/// with ceil(L0 / h) elements; converges to the Poincare constant (L0/pi)^2.
double discrete_poincare_constant(double L0, double h);

/// Writes "row col value" lines (0-based) for every stored entry.
void write_triplets(std::ostream& out, const SparseMatrix& m);

}  // namespace twowave
