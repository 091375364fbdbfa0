#include "twowave/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace twowave {

namespace {

double sin3(double s) {
  const double v = std::sin(s);
  return v * v * v;
}

void check_zero(const Profile& f, double x, const char* name, const char* where) {
  const double v = f(x);
  if (std::abs(v) > 1e-12) {
    throw Error(ErrorCode::BoundaryMismatch, std::string(name) + "(" + where + ") = " +
                                                 std::to_string(v) + ", expected 0");
  }
}

void check_match(const Profile& left, const Profile& right, double x, const char* l,
                 const char* r) {
  const double a = left(x);
  const double b = right(x);
  if (std::abs(a - b) > 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)))) {
    throw Error(ErrorCode::InterfaceMismatch, std::string(l) + "(L0) = " + std::to_string(a) +
                                                  " but " + r + "(L0) = " +
                                                  std::to_string(b));
  }
}

}  // namespace

InitialProfiles zero_profiles() {
  const Profile zero = [](double) { return 0.0; };
  return {zero, zero, zero, zero, zero, zero, zero, zero};
}

InitialProfiles default_profiles(const ValidatedConfig& cfg) {
  const double l0 = cfg.raw().L0;
  const double l = cfg.raw().L;
  InitialProfiles p = zero_profiles();
  p.u = [l0](double x) { return sin3(std::numbers::pi * x / l0); };
  p.psi = [l0, l](double x) { return sin3(std::numbers::pi * (x - l0) / (l - l0)); };
  return p;
}

StateVector project_initial_data(const Mesh& mesh, const ValidatedConfig& cfg,
                                 const InitialProfiles& pr) {
  const double l0 = cfg.raw().L0;
  const double l = cfg.raw().L;
  check_zero(pr.u, 0.0, "u0", "0");
  check_zero(pr.y, 0.0, "y0", "0");
  check_zero(pr.phi, l, "phi0", "L");
  check_zero(pr.psi, l, "psi0", "L");
  check_zero(pr.u_t, 0.0, "u1", "0");
  check_zero(pr.y_t, 0.0, "y1", "0");
  check_zero(pr.phi_t, l, "phi1", "L");
  check_zero(pr.psi_t, l, "psi1", "L");
  check_match(pr.u, pr.phi, l0, "u0", "phi0");
  check_match(pr.y, pr.psi, l0, "y0", "psi0");
  check_match(pr.u_t, pr.phi_t, l0, "u1", "phi1");
  check_match(pr.y_t, pr.psi_t, l0, "y1", "psi1");

  const Index n = mesh.dofs();
  StateVector s(n);
  for (Index i = 0; i < n; ++i) {
    const std::size_t node = static_cast<std::size_t>(i) + 1;
    const double x = mesh.nodes[node];
    const bool left = node <= mesh.interface_index;
    s.p_w()[i] = left ? pr.u(x) : pr.phi(x);
    s.p_s()[i] = left ? pr.y(x) : pr.psi(x);
    s.q_w()[i] = left ? pr.u_t(x) : pr.phi_t(x);
    s.q_s()[i] = left ? pr.y_t(x) : pr.psi_t(x);
  }
  return s;
}

MidpointStepper::MidpointStepper(const GeneratorOperator& gen, double dt) : gen_(&gen), dt_(dt) {
  if (!std::isfinite(dt) || dt == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "time step must be finite and nonzero");
  }
  const double tau = 0.5 * dt;
  const SparseMatrix& k = gen.stiffness_block();
  const SparseMatrix& c = gen.velocity_block();
  const SparseMatrix& m = gen.mass_block();
  SparseMatrix lhs = m + tau * c + (tau * tau) * k;
  rhs_q_ = m - tau * c - (tau * tau) * k;
  lhs.makeCompressed();
  rhs_q_.makeCompressed();
  damping_w_ = gen.matrices().damping_d1 + gen.matrices().damping_d2;

  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu->compute(lhs);
  if (lu->info() != Eigen::Success) {
    throw Error(ErrorCode::SolveFailure, "midpoint system factorization failed");
  }
  lu_ = std::move(lu);
}

StateVector MidpointStepper::step(const StateVector& u) const {
  const Index n = gen_->chain_size();
  if (u.chain_size() != n || u.size() != 4 * n) {
    throw Error(ErrorCode::DimensionMismatch, "state vector does not match the generator");
  }
  const double tau = 0.5 * dt_;
  const Eigen::VectorXd p = u.positions();
  const Eigen::VectorXd q = u.velocities();
  const Eigen::VectorXd rhs = rhs_q_ * q - (2.0 * tau) * (gen_->stiffness_block() * p);
  Eigen::VectorXd next(4 * n);
  next.tail(2 * n) = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success || !next.tail(2 * n).allFinite()) {
    throw Error(ErrorCode::SolveFailure, "midpoint solve failed");
  }
  next.head(2 * n) = p + tau * (q + next.tail(2 * n));
  return StateVector(n, std::move(next));
}

double MidpointStepper::balance_residual(const StateVector& u, const StateVector& next) const {
  const Eigen::VectorXd mid = 0.5 * (u.q_w() + next.q_w());
  const double e0 = energy(gen_->matrices(), u);
  const double e1 = energy(gen_->matrices(), next);
  return std::abs(e1 - e0 + dt_ * mid.dot(damping_w_ * mid));
}

StateVector step_midpoint(const GeneratorOperator& gen, const StateVector& u, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  return MidpointStepper(gen, dt).step(u);
}

SampleSchedule SampleSchedule::uniform_every(double every) {
  SampleSchedule s;
  s.kind = Kind::uniform;
  s.every = every;
  return s;
}

SampleSchedule SampleSchedule::geometric_from(double start, double ratio) {
  SampleSchedule s;
  s.kind = Kind::geometric;
  s.start = start;
  s.ratio = ratio;
  return s;
}

std::string regime_tag(Regime r) { return r == Regime::a2_equal_1 ? "a2=1" : "a2!=1"; }

EnergyTrace simulate(const GeneratorOperator& gen, const StateVector& u0, double dt, double T,
                     const SampleSchedule& schedule, const SampleCallback& on_sample) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const auto total = static_cast<std::size_t>(std::llround(std::ceil(T / dt - 1e-9)));

  // Step indices at which to record, ascending and unique.
  std::vector<std::size_t> marks{0};
  if (schedule.kind == SampleSchedule::Kind::uniform) {
    if (!(schedule.every > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(schedule.every / dt)));
    for (std::size_t k = stride; k < total; k += stride) marks.push_back(k);
  } else {
    if (!(schedule.start > 0.0) || !(schedule.ratio > 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "geometric sampling needs start > 0 and ratio > 1");
    }
    for (double t = schedule.start; t < T; t *= schedule.ratio) {
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / dt)));
      if (k < total && k != marks.back()) marks.push_back(k);
    }
  }
  if (marks.back() != total) marks.push_back(total);

  const MidpointStepper stepper(gen, dt);
  EnergyTrace trace;
  trace.config_tag = regime_tag(gen.regime());
  trace.initial_graph_norm = graph_norm(gen, u0);

  StateVector u = u0;
  double e = energy(gen.matrices(), u);
  double window_residual = 0.0;
  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * dt;
    trace.times.push_back(t);
    trace.energies.push_back(e);
    trace.balance_residuals.push_back(window_residual);
    window_residual = 0.0;
    if (on_sample) on_sample(t, u);
  };
  record(0);
  std::size_t next_mark = 1;
  const Eigen::SparseMatrix<double> damping =
      gen.matrices().damping_d1 + gen.matrices().damping_d2;
  for (std::size_t k = 1; k <= total; ++k) {
    StateVector v = stepper.step(u);
    const double e_next = energy(gen.matrices(), v);
    const Eigen::VectorXd mid = 0.5 * (u.q_w() + v.q_w());
    const double res = std::abs(e_next - e + dt * mid.dot(damping * mid));
    window_residual = std::max(window_residual, res);
    trace.max_balance_residual = std::max(trace.max_balance_residual, res);
    if (e > 0.0) trace.max_energy_increase = std::max(trace.max_energy_increase, e_next / e - 1.0);
    u = std::move(v);
    e = e_next;
    if (next_mark < marks.size() && marks[next_mark] == k) {
      record(k);
      ++next_mark;
    }
  }
  trace.steps = total;
  return trace;
}

}  // namespace twowave
