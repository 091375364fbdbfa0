#include "twowave/mesh.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string_view>

#include <Eigen/Eigenvalues>

namespace twowave {

double Mesh::max_element_size() const {
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) h = std::max(h, nodes[i + 1] - nodes[i]);
  return h;
}

Eigen::VectorXd Mesh::dof_positions() const {
  Eigen::VectorXd x(dofs());
  for (Index i = 0; i < dofs(); ++i) x[i] = nodes[static_cast<std::size_t>(i) + 1];
  return x;
}

Mesh build_mesh(const ValidatedConfig& cfg, double h_target) {
  const auto& c = cfg.raw();
  if (!(h_target > 0.0) || !std::isfinite(h_target)) {
    throw Error(ErrorCode::InvalidArgument, "h_target must be positive and finite");
  }
  if (h_target > c.L) {
    throw Error(ErrorCode::HTooCoarse, "h_target exceeds the domain length L");
  }

  const std::array<double, 11> breaks{0.0,        c.alpha[0], c.alpha[1], c.alpha[2],
                                      c.alpha[3], c.L0,       c.beta[0],  c.beta[1],
                                      c.beta[2],  c.beta[3],  c.L};
  Mesh mesh;
  mesh.nodes.push_back(0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double x0 = breaks[s];
    const double x1 = breaks[s + 1];
    // The small slack keeps e.g. 0.1 / 0.05 from rounding up to 3 elements.
    const auto m = std::max<long>(1, static_cast<long>(std::ceil((x1 - x0) / h_target - 1e-9)));
    for (long k = 1; k < m; ++k) {
      mesh.nodes.push_back(x0 + (x1 - x0) * static_cast<double>(k) / static_cast<double>(m));
    }
    // Breakpoints are copied exactly, never accumulated.
    mesh.nodes.push_back(x1);
    if (s + 1 == 5) mesh.interface_index = mesh.nodes.size() - 1;
  }

  const PiecewiseCoefficient d1 = cfg.coefficient(Coefficient::d1);
  const PiecewiseCoefficient c1 = cfg.coefficient(Coefficient::c1);
  const PiecewiseCoefficient d2 = cfg.coefficient(Coefficient::d2);
  const PiecewiseCoefficient c2 = cfg.coefficient(Coefficient::c2);
  mesh.elements.reserve(mesh.nodes.size() - 1);
  for (std::size_t e = 0; e + 1 < mesh.nodes.size(); ++e) {
    const double mid = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
    ElementCoefficients k;
    k.a = mid < c.L0 ? c.a1 : c.a2;
    k.d1 = d1(mid);
    k.c1 = c1(mid);
    k.d2 = d2(mid);
    k.c2 = c2(mid);
    mesh.elements.push_back(k);
  }
  return mesh;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds a 2x2 element block for global nodes (e, e+1); node 0 and the last node
// are Dirichlet and dropped, interior node i maps to DOF i-1.
void scatter(Triplets& t, std::size_t e, std::size_t last_node, double k00, double k01,
             double k11) {
  if (k00 == 0.0 && k01 == 0.0 && k11 == 0.0) return;
  const bool left = e != 0;
  const bool right = e + 1 != last_node;
  const auto i = static_cast<Index>(e) - 1;
  const auto j = static_cast<Index>(e);
  if (left) t.emplace_back(i, i, k00);
  if (right) t.emplace_back(j, j, k11);
  if (left && right) {
    t.emplace_back(i, j, k01);
    t.emplace_back(j, i, k01);
  }
}

SparseMatrix from_triplets(Index n, const Triplets& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SystemMatrices assemble_matrices(const Mesh& mesh, const ValidatedConfig& cfg) {
  (void)cfg;  // coefficients already live on the mesh elements
  const Index n = mesh.dofs();
  const std::size_t last = mesh.nodes.size() - 1;
  Triplets mass, sw, ss, cc1, cc2, dd1, dd2;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.nodes[e + 1] - mesh.nodes[e];
    const ElementCoefficients& k = mesh.elements[e];
    // P1 on [x_e, x_e+1]: mass h/6 [[2,1],[1,2]], stiffness 1/h [[1,-1],[-1,1]].
    const double m0 = h / 3.0;
    const double m1 = h / 6.0;
    const double s0 = 1.0 / h;
    scatter(mass, e, last, m0, m1, m0);
    scatter(sw, e, last, k.a * s0, -k.a * s0, k.a * s0);
    scatter(ss, e, last, s0, -s0, s0);
    scatter(cc1, e, last, k.c1 * m0, k.c1 * m1, k.c1 * m0);
    scatter(cc2, e, last, k.c2 * m0, k.c2 * m1, k.c2 * m0);
    scatter(dd1, e, last, k.d1 * m0, k.d1 * m1, k.d1 * m0);
    scatter(dd2, e, last, k.d2 * m0, k.d2 * m1, k.d2 * m0);
  }
  SystemMatrices out;
  out.n = n;
  out.mass = from_triplets(n, mass);
  out.stiffness_w = from_triplets(n, sw);
  out.stiffness_s = from_triplets(n, ss);
  out.coupling_c1 = from_triplets(n, cc1);
  out.coupling_c2 = from_triplets(n, cc2);
  out.damping_d1 = from_triplets(n, dd1);
  out.damping_d2 = from_triplets(n, dd2);
  return out;
}

StateVector::StateVector(Index n, Eigen::VectorXd data) : n_(n), data_(std::move(data)) {
  if (data_.size() != 4 * n) {
    throw Error(ErrorCode::DimensionMismatch, "state vector length must be 4n");
  }
}

GramMatrix energy_gram(const SystemMatrices& mats) {
  const Index n = mats.n;
  std::vector<Eigen::Triplet<double>> t;
  auto add_block = [&t](const SparseMatrix& m, Index r0, Index c0) {
    for (Index k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      }
    }
  };
  add_block(mats.stiffness_w, 0, 0);
  add_block(mats.coupling_c1, 0, n);
  add_block(mats.coupling_c1, n, 0);
  add_block(mats.stiffness_s, n, n);
  add_block(mats.mass, 2 * n, 2 * n);
  add_block(mats.mass, 3 * n, 3 * n);

  GramMatrix g;
  g.h_.resize(4 * n, 4 * n);
  g.h_.setFromTriplets(t.begin(), t.end());
  g.h_.makeCompressed();

  Eigen::SimplicialLLT<SparseMatrix> llt(g.h_);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::IndefiniteGram,
                "energy Gram matrix is not positive definite (coercivity lost)");
  }
  return g;
}

double potential_form(const SystemMatrices& mats, const StateVector& u) {
  if (u.chain_size() != mats.n) throw Error(ErrorCode::DimensionMismatch, "state/matrix size");
  const Eigen::VectorXd pw = u.p_w();
  const Eigen::VectorXd ps = u.p_s();
  return pw.dot(mats.stiffness_w * pw) + ps.dot(mats.stiffness_s * ps) +
         2.0 * pw.dot(mats.coupling_c1 * ps);
}

double energy(const SystemMatrices& mats, const StateVector& u) {
  const double pot = potential_form(mats, u);
  const Eigen::VectorXd qw = u.q_w();
  const Eigen::VectorXd qs = u.q_s();
  return 0.5 * (pot + qw.dot(mats.mass * qw) + qs.dot(mats.mass * qs));
}

double l2_error(const Mesh& mesh, const Eigen::VectorXd& dofs, const Profile& exact) {
  if (dofs.size() != mesh.dofs()) throw Error(ErrorCode::DimensionMismatch, "DOF vector size");
  const double g = std::sqrt(0.6);
  const std::array<double, 3> pts{-g, 0.0, g};
  const std::array<double, 3> wts{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const std::size_t last = mesh.nodes.size() - 1;
  auto value = [&](std::size_t node) {
    return node == 0 || node == last ? 0.0 : dofs[static_cast<Index>(node) - 1];
  };
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.nodes[e + 1] - x0;
    const double v0 = value(e);
    const double v1 = value(e + 1);
    for (std::size_t k = 0; k < 3; ++k) {
      const double s = 0.5 * (pts[k] + 1.0);
      const double diff = v0 + (v1 - v0) * s - exact(x0 + s * h);
      sum += 0.5 * h * wts[k] * diff * diff;
    }
  }
  return std::sqrt(sum);
}

double discrete_poincare_constant(double L0, double h) {
  if (!(L0 > 0.0)) throw Error(ErrorCode::NonpositiveLength, "L0 must be positive");
  if (!(h > 0.0) || h > L0) throw Error(ErrorCode::InvalidArgument, "h must lie in (0, L0]");
  const auto m = std::max<Index>(2, static_cast<Index>(std::ceil(L0 / h - 1e-9)));
  const double he = L0 / static_cast<double>(m);
  const Index n = m - 1;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 2.0 / he;
    mm(i, i) = 2.0 * he / 3.0;
    if (i + 1 < n) {
      k(i, i + 1) = k(i + 1, i) = -1.0 / he;
      mm(i, i + 1) = mm(i + 1, i) = he / 6.0;
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, mm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "Laplacian eigensolve failed");
  }
  return 1.0 / es.eigenvalues().minCoeff();
}

void write_triplets(std::ostream& out, const SparseMatrix& m) {
  char buf[64];
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, it.value());
      (void)ec;
      out << it.row() << ' ' << it.col() << ' ' << std::string_view(buf, end - buf) << '\n';
    }
  }
}

}  // namespace twowave
