#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "twowave/mesh.hpp"

using namespace twowave;

namespace {

ValidatedConfig cfg_default() { return validate_config(default_config()); }

}  // namespace

TEST_CASE("mesh is aligned with every breakpoint") {
  const ValidatedConfig cfg = cfg_default();
  const auto& c = cfg.raw();
  for (double h : {0.5, 0.05, 0.02, 0.013}) {
    const Mesh m = build_mesh(cfg, h);
    CHECK(m.nodes.front() == 0.0);
    CHECK(m.nodes.back() == c.L);
    CHECK(m.nodes[m.interface_index] == c.L0);
    for (double b : {c.alpha[0], c.alpha[1], c.alpha[2], c.alpha[3], c.beta[0], c.beta[1],
                     c.beta[2], c.beta[3]}) {
      CHECK(std::find(m.nodes.begin(), m.nodes.end(), b) != m.nodes.end());
    }
    CHECK(m.max_element_size() <= h * (1 + 1e-12));
    CHECK(m.element_count() + 1 == m.nodes.size());
    CHECK(m.dofs() == static_cast<Index>(m.nodes.size()) - 2);
    for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i) CHECK(m.nodes[i] < m.nodes[i + 1]);
  }
  // 0.1 / 0.05 is exactly two elements, not three.
  CHECK(build_mesh(cfg, 0.05).nodes.size() == 41);
}

TEST_CASE("mesh size errors") {
  const ValidatedConfig cfg = cfg_default();
  try {
    build_mesh(cfg, 3.0);
    FAIL("expected HTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HTooCoarse);
  }
  CHECK_THROWS_AS(build_mesh(cfg, 0.0), Error);
  CHECK_THROWS_AS(build_mesh(cfg, -0.1), Error);
  // Coarser than every segment still gives one element per segment.
  CHECK(build_mesh(cfg, 1.9).element_count() == 10);
}

TEST_CASE("element coefficients follow the supports") {
  const ValidatedConfig cfg = validate_config(default_config(2.0));
  const Mesh m = build_mesh(cfg, 0.05);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const double mid = 0.5 * (m.nodes[e] + m.nodes[e + 1]);
    CHECK(m.elements[e].a == (mid < 1.0 ? 1.0 : 2.0));
    CHECK(m.elements[e].c1 == ((mid > 0.1 && mid < 0.3) ? 0.5 : 0.0));
    CHECK(m.elements[e].d2 == ((mid > 1.2 && mid < 1.4) ? 1.0 : 0.0));
    CHECK(m.elements[e].c2 == ((mid > 1.1 && mid < 1.3) ? 1.0 : 0.0));
    CHECK(m.elements[e].d1 == 0.0);
  }
}

TEST_CASE("stiffness matches a hand assembly on the coarsest mesh") {
  const ValidatedConfig cfg = validate_config(default_config(2.0));
  const Mesh m = build_mesh(cfg, 1.9);  // nodes = breakpoints
  const SystemMatrices mats = assemble_matrices(m, cfg);
  const auto& x = m.nodes;
  const Index n = m.dofs();
  REQUIRE(n == 9);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double xl = x[i], xi = x[i + 1], xr = x[i + 2];
    const double al = 0.5 * (xl + xi) < 1.0 ? 1.0 : 2.0;
    const double ar = 0.5 * (xi + xr) < 1.0 ? 1.0 : 2.0;
    k(i, i) = al / (xi - xl) + ar / (xr - xi);
    mass(i, i) = (xr - xl) / 3.0;
    if (i + 1 < n) {
      k(i, i + 1) = k(i + 1, i) = -ar / (xr - xi);
      mass(i, i + 1) = mass(i + 1, i) = (xr - xi) / 6.0;
    }
  }
  CHECK((Eigen::MatrixXd(mats.stiffness_w) - k).norm() <= 1e-12 * k.norm());
  CHECK((Eigen::MatrixXd(mats.mass) - mass).norm() <= 1e-14 * mass.norm());
  // Unit speed on both sides for the second chain.
  Eigen::MatrixXd ks = Eigen::MatrixXd(mats.stiffness_s);
  CHECK(ks(0, 0) == doctest::Approx(1.0 / (x[1] - x[0]) + 1.0 / (x[2] - x[1])));
}

TEST_CASE("mass matrix integrates the interior partition of unity") {
  const ValidatedConfig cfg = cfg_default();
  const Mesh m = build_mesh(cfg, 0.02);
  const SystemMatrices mats = assemble_matrices(m, cfg);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.dofs());
  // sum_i phi_i is 1 except on the two end elements, where it ramps from 0.
  const double h0 = m.nodes[1] - m.nodes[0];
  const double hl = m.nodes.back() - m.nodes[m.nodes.size() - 2];
  const double l = cfg.raw().L;
  CHECK(one.dot(mats.mass * one) == doctest::Approx(l - h0 - hl + h0 / 3 + hl / 3).epsilon(1e-13));
  // int c1 (sum phi)^2 = c1 * |support|, the support lies away from the ends.
  CHECK(one.dot(mats.coupling_c1 * one) == doctest::Approx(0.5 * 0.2).epsilon(1e-13));
  CHECK(one.dot(mats.damping_d2 * one) == doctest::Approx(1.0 * 0.2).epsilon(1e-13));
  CHECK(one.dot(mats.coupling_c2 * one) == doctest::Approx(1.0 * 0.2).epsilon(1e-13));
  CHECK(mats.damping_d1.nonZeros() == 0);
}

TEST_CASE("energy of smooth states approaches the continuous value") {
  SystemConfig raw = default_config();
  raw.c1 = 0.0;
  const ValidatedConfig cfg = validate_config(raw);
  const Mesh m = build_mesh(cfg, 0.005);
  const SystemMatrices mats = assemble_matrices(m, cfg);
  const Eigen::VectorXd x = m.dof_positions();
  StateVector u(m.dofs());
  // w = sin(pi x / 2) on (0, 2): 1/2 int w'^2 = pi^2 / 8.
  for (Index i = 0; i < x.size(); ++i) u.p_w()[i] = std::sin(std::numbers::pi * x[i] / 2);
  CHECK(energy(mats, u) == doctest::Approx(std::numbers::pi * std::numbers::pi / 8).epsilon(1e-4));
  // Same profile as a velocity: 1/2 int w^2 = 1/2.
  StateVector v(m.dofs());
  for (Index i = 0; i < x.size(); ++i) v.q_s()[i] = std::sin(std::numbers::pi * x[i] / 2);
  CHECK(energy(mats, v) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(potential_form(mats, v) == 0.0);
}

TEST_CASE("energy Gram is definite in regime and indefinite with strong coupling") {
  const ValidatedConfig cfg = cfg_default();
  const Mesh m = build_mesh(cfg, 0.05);
  SystemMatrices mats = assemble_matrices(m, cfg);
  const GramMatrix g = energy_gram(mats);
  CHECK(g.dimension() == 4 * m.dofs());
  const Eigen::MatrixXd dense = Eigen::MatrixXd(g.matrix());
  CHECK((dense - dense.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  mats.coupling_c1 *= 1000.0;
  try {
    energy_gram(mats);
    FAIL("expected IndefiniteGram");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndefiniteGram);
  }
}

TEST_CASE("energy equals half the Gram form") {
  const ValidatedConfig cfg = cfg_default();
  const Mesh m = build_mesh(cfg, 0.05);
  const SystemMatrices mats = assemble_matrices(m, cfg);
  const GramMatrix g = energy_gram(mats);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXd data(4 * m.dofs());
  for (Index i = 0; i < data.size(); ++i) data[i] = nd(rng);
  const StateVector u(m.dofs(), data);
  CHECK(energy(mats, u) == doctest::Approx(0.5 * data.dot(g.matrix() * data)).epsilon(1e-13));
}

TEST_CASE("state vector layout and size checks") {
  StateVector u(3);
  CHECK(u.size() == 12);
  u.q_s()[2] = 7.0;
  CHECK(u.vector()[11] == 7.0);
  u.p_s()[0] = 2.0;
  CHECK(u.positions()[3] == 2.0);
  try {
    StateVector bad(3, Eigen::VectorXd::Zero(11));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("triplet export round-trips exactly") {
  SparseMatrix m(3, 3);
  m.insert(0, 0) = 0.1;
  m.insert(2, 1) = -1.0 / 3.0;
  m.makeCompressed();
  std::ostringstream out;
  write_triplets(out, m);
  std::istringstream in(out.str());
  Index r = 0, c = 0;
  double v = 0.0;
  in >> r >> c >> v;
  CHECK((r == 0 && c == 0 && v == 0.1));
  in >> r >> c >> v;
  CHECK((r == 2 && c == 1 && v == -1.0 / 3.0));
}

TEST_CASE("L2 error of the interpolant of a piecewise linear function vanishes") {
  const ValidatedConfig cfg = cfg_default();
  const Mesh m = build_mesh(cfg, 0.1);
  const auto f = [](double x) { return x < 1.0 ? x : 2.0 - x; };  // hat, zero at both ends
  Eigen::VectorXd d(m.dofs());
  const Eigen::VectorXd x = m.dof_positions();
  for (Index i = 0; i < d.size(); ++i) d[i] = f(x[i]);
  CHECK(l2_error(m, d, f) <= 1e-14);
  // Against zero the error is the L2 norm of the hat: sqrt(2/3).
  CHECK(l2_error(m, Eigen::VectorXd::Zero(m.dofs()), f) == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("discrete poincare constant matches the closed-form P1 eigenvalue") {
  for (double h : {0.1, 0.01, 0.005}) {
    const double th = std::numbers::pi * h;  // L0 = 1, uniform
    const double mu = 6.0 / (h * h) * (1 - std::cos(th)) / (2 + std::cos(th));
    CHECK(discrete_poincare_constant(1.0, h) == doctest::Approx(1.0 / mu).epsilon(1e-10));
  }
  CHECK(discrete_poincare_constant(1.0, 0.005) < poincare_constant(1.0));
}
