#include "twowave/generator.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace twowave {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& t, const SparseMatrix& m, Index r0, Index c0, double scale = 1.0) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
    }
  }
}

SparseMatrix build(Index rows, Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

}  // namespace

GeneratorOperator::GeneratorOperator(const ValidatedConfig& cfg, double h_target)
    : GeneratorOperator(cfg, build_mesh(cfg, h_target)) {}

GeneratorOperator::GeneratorOperator(const ValidatedConfig& cfg, Mesh mesh)
    : cfg_(cfg),
      mesh_(std::move(mesh)),
      mats_(assemble_matrices(mesh_, cfg_)),
      gram_(energy_gram(mats_)),
      regime_(cfg.raw().a2 == 1.0 ? Regime::a2_equal_1 : Regime::a2_not_1) {
  const Index n = mats_.n;
  Triplets k, c, m;
  add_block(k, mats_.stiffness_w, 0, 0);
  add_block(k, mats_.coupling_c1, 0, n);
  add_block(k, mats_.coupling_c1, n, 0);
  add_block(k, mats_.stiffness_s, n, n);
  add_block(c, mats_.damping_d1, 0, 0);
  add_block(c, mats_.damping_d2, 0, 0);
  add_block(c, mats_.coupling_c2, 0, n);
  add_block(c, mats_.coupling_c2, n, 0, -1.0);
  add_block(m, mats_.mass, 0, 0);
  add_block(m, mats_.mass, n, n);
  stiffness_ = build(2 * n, 2 * n, k);
  velocity_ = build(2 * n, 2 * n, c);
  mass_ = build(2 * n, 2 * n, m);

  auto mass_llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(mats_.mass);
  if (mass_llt->info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "mass matrix factorization failed");
  }
  mass_solver_ = std::move(mass_llt);

  // -A_h in first-order form, velocity rows scaled by Mb.
  Triplets s;
  for (Index i = 0; i < 2 * n; ++i) s.emplace_back(i, 2 * n + i, -1.0);
  add_block(s, stiffness_, 2 * n, 0);
  add_block(s, velocity_, 2 * n, 2 * n);
  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu->compute(build(4 * n, 4 * n, s));
  if (lu->info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "static block system is singular");
  }
  static_solver_ = std::move(lu);
}

void GeneratorOperator::check(const StateVector& u) const {
  if (u.chain_size() != mats_.n || u.size() != 4 * mats_.n) {
    throw Error(ErrorCode::DimensionMismatch, "state vector does not match the generator");
  }
}

Eigen::VectorXd GeneratorOperator::solve_mass(const Eigen::VectorXd& rhs) const {
  return mass_solver_->solve(rhs);
}

StateVector GeneratorOperator::apply(const StateVector& u) const {
  check(u);
  const Index n = mats_.n;
  StateVector out(n);
  out.p_w() = u.q_w();
  out.p_s() = u.q_s();
  const Eigen::VectorXd force =
      stiffness_ * u.positions() + velocity_ * u.velocities();
  out.q_w() = -solve_mass(force.head(n));
  out.q_s() = -solve_mass(force.tail(n));
  return out;
}

Eigen::VectorXcd GeneratorOperator::apply(const Eigen::VectorXcd& u) const {
  if (u.size() != state_size()) {
    throw Error(ErrorCode::DimensionMismatch, "state vector does not match the generator");
  }
  const Index n = mats_.n;
  const StateVector re = apply(StateVector(n, u.real()));
  const StateVector im = apply(StateVector(n, u.imag()));
  Eigen::VectorXcd out(u.size());
  out.real() = re.vector();
  out.imag() = im.vector();
  return out;
}

double GeneratorOperator::inner(const StateVector& u, const StateVector& v) const {
  check(u);
  check(v);
  return u.vector().dot(gram_.matrix() * v.vector());
}

double GeneratorOperator::norm(const StateVector& u) const { return std::sqrt(inner(u, u)); }

std::complex<double> GeneratorOperator::inner(const Eigen::VectorXcd& u,
                                              const Eigen::VectorXcd& v) const {
  if (u.size() != state_size() || v.size() != state_size()) {
    throw Error(ErrorCode::DimensionMismatch, "state vector does not match the generator");
  }
  // Conjugate-linear in the first argument.
  const Eigen::VectorXcd hv = gram_.matrix().cast<std::complex<double>>() * v;
  return u.dot(hv);
}

double GeneratorOperator::norm(const Eigen::VectorXcd& u) const {
  return std::sqrt(std::max(0.0, inner(u, u).real()));
}

StateVector GeneratorOperator::static_solve(const StateVector& f) const {
  check(f);
  if (!f.vector().allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "forcing contains non-finite values");
  }
  const Index n = mats_.n;
  Eigen::VectorXd rhs(4 * n);
  rhs.head(2 * n) = f.positions();
  rhs.tail(2 * n) = mass_ * f.velocities();
  Eigen::VectorXd x = static_solver_->solve(rhs);
  if (static_solver_->info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "static solve failed");
  }
  // Velocities are exact; keep them free of LU roundoff.
  x.tail(2 * n) = -f.positions();
  return StateVector(n, std::move(x));
}

std::pair<double, double> dissipation_identity(const GeneratorOperator& gen,
                                               const StateVector& u) {
  const StateVector au = gen.apply(u);
  const double lhs = gen.inner(au, u);
  const Eigen::VectorXd qw = u.q_w();
  const auto& m = gen.matrices();
  const double rhs = -(qw.dot(m.damping_d2 * qw) + qw.dot(m.damping_d1 * qw));
  return {lhs, rhs};
}

double graph_norm(const GeneratorOperator& gen, const StateVector& u) {
  const StateVector au = gen.apply(u);
  return std::sqrt(gen.inner(u, u) + gen.inner(au, au));
}

double static_residual(const GeneratorOperator& gen, const StateVector& u, const StateVector& f) {
  StateVector r = gen.apply(u);
  r.vector() += f.vector();
  const double fn = gen.norm(f);
  const double rn = gen.norm(r);
  if (fn == 0.0) return rn;
  return rn / fn;
}

StaticProblem manufactured_static_problem(const ValidatedConfig& cfg) {
  const double l0 = cfg.raw().L0;
  const double l = cfg.raw().L;
  const double a1 = cfg.raw().a1;
  const double a2 = cfg.raw().a2;
  const PiecewiseCoefficient c1 = cfg.coefficient(Coefficient::c1);
  const double k = std::numbers::pi / l;
  StaticProblem p;
  // a w = x (x - L0) (x^2 - L^2): continuous w and flux, curvature at L0.
  const auto w = [=](double x) { return x * (x - l0) * (x * x - l * l) / (x < l0 ? a1 : a2); };
  p.w = w;
  p.s = [=](double x) { return std::sin(k * x); };
  p.f_w = [=](double x) {
    return -(12.0 * x * x - 6.0 * l0 * x - 2.0 * l * l) + c1(x) * std::sin(k * x);
  };
  p.f_s = [=](double x) { return k * k * std::sin(k * x) + c1(x) * w(x); };
  return p;
}

StateVector load_forcing(const GeneratorOperator& gen, const Profile& f_w, const Profile& f_s) {
  const Mesh& mesh = gen.mesh();
  const Index n = gen.chain_size();
  const double g = std::sqrt(0.6);
  const std::array<double, 3> pts{-g, 0.0, g};
  const std::array<double, 3> wts{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const std::size_t last = mesh.nodes.size() - 1;
  Eigen::VectorXd bw = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd bs = Eigen::VectorXd::Zero(n);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.nodes[e + 1] - x0;
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = 0.5 * (pts[q] + 1.0);
      const double x = x0 + s * h;
      const double w = 0.5 * h * wts[q];
      const double fw = f_w(x);
      const double fs = f_s(x);
      if (e != 0) {
        bw[static_cast<Index>(e) - 1] += w * fw * (1.0 - s);
        bs[static_cast<Index>(e) - 1] += w * fs * (1.0 - s);
      }
      if (e + 1 != last) {
        bw[static_cast<Index>(e)] += w * fw * s;
        bs[static_cast<Index>(e)] += w * fs * s;
      }
    }
  }
  StateVector f(n);
  f.q_w() = gen.solve_mass(bw);
  f.q_s() = gen.solve_mass(bs);
  return f;
}

double interface_flux_jump(const GeneratorOperator& gen, const StateVector& u) {
  const Mesh& mesh = gen.mesh();
  const std::size_t i = mesh.interface_index;
  const std::size_t last = mesh.nodes.size() - 1;
  auto value = [&](std::size_t node) {
    return node == 0 || node == last ? 0.0 : u.p_w()[static_cast<Index>(node) - 1];
  };
  const double left = (value(i) - value(i - 1)) / (mesh.nodes[i] - mesh.nodes[i - 1]);
  const double right = (value(i + 1) - value(i)) / (mesh.nodes[i + 1] - mesh.nodes[i]);
  return gen.config().raw().a1 * left - gen.config().raw().a2 * right;
}

}  // namespace twowave
