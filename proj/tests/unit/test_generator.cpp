#include <doctest.h>

#include <cmath>
#include <random>

#include "twowave/generator.hpp"

using namespace twowave;

namespace {

StateVector random_state(Index n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(4 * n);
  for (Index i = 0; i < v.size(); ++i) v[i] = nd(rng);
  return StateVector(n, v);
}

SystemConfig conservative_config() {
  SystemConfig c = default_config();
  c.d2 = 0.0;
  c.c2 = 0.0;
  return c;
}

}  // namespace

TEST_CASE("generator action matches the dense block formula") {
  const ValidatedConfig cfg = validate_config(default_config(2.0));
  const GeneratorOperator gen(cfg, 0.1);
  const SystemMatrices& m = gen.matrices();
  const Index n = m.n;
  const Eigen::MatrixXd minv = Eigen::MatrixXd(m.mass).inverse();
  const Eigen::MatrixXd sw(m.stiffness_w), ss(m.stiffness_s), c1(m.coupling_c1),
      c2(m.coupling_c2), d2(m.damping_d2);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector u = random_state(n, rng);
    const StateVector au = gen.apply(u);
    const Eigen::VectorXd pw = u.p_w(), ps = u.p_s(), qw = u.q_w(), qs = u.q_s();
    const Eigen::VectorXd fw = sw * pw + c1 * ps + d2 * qw + c2 * qs;
    const Eigen::VectorXd fs = ss * ps + c1 * pw - c2 * qw;
    CHECK((au.p_w() - qw).norm() == 0.0);
    CHECK((au.p_s() - qs).norm() == 0.0);
    CHECK((au.q_w() + minv * fw).norm() <= 1e-9 * (minv * fw).norm());
    CHECK((au.q_s() + minv * fs).norm() <= 1e-9 * (minv * fs).norm());
  }
  CHECK(gen.regime() == Regime::a2_not_1);
  CHECK(gen.state_size() == 4 * n);
  CHECK_FALSE(gen.conservative());
}

TEST_CASE("dissipation identity on random states") {
  for (double a2 : {1.0, 2.0}) {
    const ValidatedConfig cfg = validate_config(default_config(a2));
    const GeneratorOperator gen(cfg, 0.02);
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const StateVector u = random_state(gen.chain_size(), rng);
      const auto [lhs, rhs] = dissipation_identity(gen, u);
      const double scale = gen.inner(u, u);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
      CHECK(lhs <= 1e-12 * scale);
    }
  }
}

TEST_CASE("d1 adds to the dissipation") {
  SystemConfig raw = default_config();
  raw.d1 = 0.7;
  const GeneratorOperator gen(validate_config(raw), 0.05);
  std::mt19937 rng(9);
  const StateVector u = random_state(gen.chain_size(), rng);
  const auto [lhs, rhs] = dissipation_identity(gen, u);
  const Eigen::VectorXd qw = u.q_w();
  const double d2_only = -qw.dot(gen.matrices().damping_d2 * qw);
  CHECK(rhs < d2_only);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * gen.inner(u, u));
}

TEST_CASE("conservative generator is skew in the energy inner product") {
  const GeneratorOperator gen(validate_config(conservative_config()), 0.05);
  CHECK(gen.conservative());
  std::mt19937 rng(2);
  const StateVector u = random_state(gen.chain_size(), rng);
  const StateVector v = random_state(gen.chain_size(), rng);
  const double scale = gen.norm(u) * gen.norm(v);
  CHECK(std::abs(gen.inner(gen.apply(u), v) + gen.inner(u, gen.apply(v))) <= 1e-10 * scale);
}

TEST_CASE("complex action and inner product") {
  const GeneratorOperator gen(validate_config(default_config()), 0.1);
  std::mt19937 rng(4);
  const StateVector re = random_state(gen.chain_size(), rng);
  const StateVector im = random_state(gen.chain_size(), rng);
  Eigen::VectorXcd z(gen.state_size());
  z.real() = re.vector();
  z.imag() = im.vector();
  const Eigen::VectorXcd az = gen.apply(z);
  CHECK((az.real() - gen.apply(re).vector()).norm() == 0.0);
  CHECK((az.imag() - gen.apply(im).vector()).norm() == 0.0);
  const std::complex<double> zz = gen.inner(z, z);
  CHECK(zz.real() == doctest::Approx(gen.inner(re, re) + gen.inner(im, im)));
  CHECK(std::abs(zz.imag()) <= 1e-12 * zz.real());
  // Conjugate-linear in the first slot.
  const std::complex<double> i(0.0, 1.0);
  const Eigen::VectorXcd iz = i * z;
  CHECK(std::abs(gen.inner(iz, z) - std::conj(i) * zz) <= 1e-12 * zz.real());
}

TEST_CASE("static solve inverts -A_h") {
  for (double a2 : {1.0, 2.0}) {
    const GeneratorOperator gen(validate_config(default_config(a2)), 0.02);
    std::mt19937 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      const StateVector f = random_state(gen.chain_size(), rng);
      const StateVector u = gen.static_solve(f);
      CHECK(static_residual(gen, u, f) <= 1e-10);
      CHECK((u.velocities() + f.positions()).norm() == 0.0);
    }
  }
  const GeneratorOperator gen(validate_config(default_config()), 0.1);
  CHECK(gen.static_solve(StateVector(gen.chain_size())).vector().norm() == 0.0);
  try {
    gen.static_solve(StateVector(3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("manufactured static problem converges at second order") {
  const ValidatedConfig cfg = validate_config(default_config(2.0));
  const StaticProblem p = manufactured_static_problem(cfg);
  // The exact solution satisfies the interface conditions it was built for.
  const double l0 = cfg.raw().L0;
  const double e = 1e-7;
  CHECK(p.w(0.0) == 0.0);
  CHECK(std::abs(p.w(2.0)) <= 1e-15);
  CHECK(std::abs(p.w(l0 - 1e-12) - p.w(l0 + 1e-12)) <= 1e-10);
  const double flux_l = cfg.raw().a1 * (p.w(l0 - e) - p.w(l0 - 2 * e)) / e;
  const double flux_r = cfg.raw().a2 * (p.w(l0 + 2 * e) - p.w(l0 + e)) / e;
  CHECK(flux_l == doctest::Approx(flux_r).epsilon(1e-5));

  std::vector<double> errors, jumps;
  for (double h : {0.04, 0.02, 0.01}) {
    const GeneratorOperator gen(cfg, h);
    const StateVector f = load_forcing(gen, p.f_w, p.f_s);
    const StateVector u = gen.static_solve(f);
    errors.push_back(std::hypot(l2_error(gen.mesh(), u.p_w(), p.w),
                                l2_error(gen.mesh(), u.p_s(), p.s)));
    jumps.push_back(std::abs(interface_flux_jump(gen, u)));
  }
  CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
  CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
  CHECK(std::log2(jumps[0] / jumps[1]) >= 0.9);
  CHECK(std::log2(jumps[1] / jumps[2]) >= 0.9);
}

TEST_CASE("load vector of a constant integrates the hat functions") {
  const GeneratorOperator gen(validate_config(default_config()), 0.05);
  const StateVector f = load_forcing(gen, [](double) { return 1.0; }, [](double) { return 2.0; });
  // F_q = M^{-1} b with b_i = int phi_i, so M F_q summed over i equals int sum phi_i.
  const Eigen::VectorXd mfw = gen.matrices().mass * Eigen::VectorXd(f.q_w());
  const Eigen::VectorXd mfs = gen.matrices().mass * Eigen::VectorXd(f.q_s());
  const auto& x = gen.mesh().nodes;
  const double interior = x.back() - 0.5 * (x[1] - x[0]) - 0.5 * (x.back() - x[x.size() - 2]);
  CHECK(mfw.sum() == doctest::Approx(interior).epsilon(1e-12));
  CHECK(mfs.sum() == doctest::Approx(2 * interior).epsilon(1e-12));
  CHECK(f.positions().norm() == 0.0);
}

TEST_CASE("graph norm dominates the energy norm") {
  const GeneratorOperator gen(validate_config(default_config()), 0.05);
  std::mt19937 rng(1);
  const StateVector u = random_state(gen.chain_size(), rng);
  const double g = graph_norm(gen, u);
  CHECK(g >= gen.norm(u));
  CHECK(g * g == doctest::Approx(gen.inner(u, u) + gen.inner(gen.apply(u), gen.apply(u))));
}
