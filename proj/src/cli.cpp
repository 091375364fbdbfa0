#include "twowave/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "twowave/decay.hpp"
#include "twowave/io.hpp"
#include "twowave/spectrum.hpp"
#include "twowave/timestep.hpp"

namespace twowave {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return f;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::IndefiniteGram:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::SolveFailure:
    case ErrorCode::SingularSystem:
    case ErrorCode::EnergyUnderflow:
      return kExitFinding;
    default:
      return kExitUsage;
  }
}

SystemConfig load_config(const Command& cmd) {
  SystemConfig c = cmd.config_path ? parse_config(*cmd.config_path) : default_config();
  for (const auto& o : cmd.overrides) apply_override(c, o);
  return c;
}

HeaderFields fields(std::initializer_list<std::pair<std::string, double>> values) {
  HeaderFields f;
  for (const auto& [k, v] : values) f.emplace_back(k, format_double(v));
  return f;
}

struct SpectrumCheck {
  SpectrumResult result;
  bool dissipative = true;  // max Re <= 1e-9
  bool gap_positive = true; // abscissa < 0 and gap > 0
};

SpectrumCheck run_spectrum(const GeneratorOperator& gen, const Command& cmd, const fs::path& dir,
                           std::ostream& out) {
  SpectrumCheck s;
  s.result = cmd.near ? eigenvalues_near(gen, *cmd.near, cmd.count) : eigenvalues(gen);
  s.dissipative = s.result.spectral_abscissa <= 1e-9;
  s.gap_positive = s.result.spectral_abscissa < 0.0 && s.result.imag_axis_gap > 0.0;
  const SystemConfig& raw = gen.config().raw();
  auto csv = open_output(dir / "eigenvalues.csv");
  write_eigenvalues_csv(csv, s.result, raw, fields({{"h", gen.mesh_h()}}));
  auto gp = open_output(dir / "eigenvalues.gp");
  write_eigenvalue_plot(gp, raw, "eigenvalues.csv");
  out << "eigenvalues: " << s.result.eigenvalues.size() << (cmd.near ? " (nearest)" : "") << '\n'
      << "mesh h: " << format_double(gen.mesh_h()) << '\n'
      << "spectral abscissa: " << format_double(s.result.spectral_abscissa) << '\n'
      << "imaginary axis gap: " << format_double(s.result.imag_axis_gap) << '\n';
  return s;
}

ResolventSamples run_resolvent(const GeneratorOperator& gen, double lambda_min,
                               double lambda_max, int points, const fs::path& dir,
                               std::ostream& out, std::ostream& err) {
  const ResolventEvaluator eval(gen);
  const std::vector<double> grid = log_grid(lambda_min, lambda_max, points);
  const ResolventSamples s = resolvent_sweep(eval, grid);
  if (s.dropped_points > 0) {
    err << "warning: " << s.dropped_points << " grid points above the cutoff "
        << format_double(frequency_cutoff(gen.mesh_h())) << " were dropped\n";
  }
  const SystemConfig& raw = gen.config().raw();
  const HeaderFields f = fields({{"h", gen.mesh_h()}, {"lambda_min", s.band_min},
                                 {"lambda_max", s.band_max}});
  auto csv = open_output(dir / "resolvent.csv");
  write_resolvent_csv(csv, s, raw, f);
  auto env = open_output(dir / "resolvent_envelope.csv");
  write_envelope_csv(env, s, raw, f);
  auto gp = open_output(dir / "resolvent.gp");
  write_resolvent_plot(gp, raw, "resolvent.csv", "resolvent_envelope.csv");
  json report = sweep_to_json(s);
  report["config"] = config_to_json(raw);
  report["h"] = gen.mesh_h();
  auto js = open_output(dir / "resolvent.json");
  js << report.dump(2) << '\n';
  out << "resolvent band: [" << format_double(s.band_min) << ", " << format_double(s.band_max)
      << "]\n"
      << "envelope exponent: " << format_double(s.fitted_exponent)
      << " (R^2 " << format_double(s.r_squared) << ", " << s.envelope_points() << " points)\n";
  if (s.any_near_singular()) out << "near-singular samples present\n";
  return s;
}

struct TraceRun {
  EnergyTrace trace;
  bool balanced = true;
  bool monotone = true;
};

TraceRun run_trace(const GeneratorOperator& gen, const Command& cmd, const fs::path& dir,
                   std::ostream& out) {
  const ValidatedConfig& cfg = gen.config();
  const bool equal = gen.regime() == Regime::a2_equal_1;
  const double T = cmd.T.value_or(equal ? 200.0 : cmd.T_poly);
  const SampleSchedule schedule =
      equal ? SampleSchedule::uniform_every(cmd.sample_every)
            : SampleSchedule::geometric_from(cmd.geometric_start, cmd.geometric_ratio);
  const StateVector u0 = project_initial_data(gen.mesh(), cfg, default_profiles(cfg));

  std::size_t snap = 0;
  SampleCallback on_sample;
  if (cmd.snapshots) {
    on_sample = [&](double t, const StateVector& u) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(5) << std::setfill('0') << snap++ << ".csv";
      auto f = open_output(dir / "snapshots" / name.str());
      write_snapshot_csv(f, gen.mesh(), u, t, cfg.raw());
    };
  }
  TraceRun r;
  r.trace = simulate(gen, u0, cmd.dt, T, schedule, on_sample);
  const double e0 = r.trace.energies.front();
  r.balanced = r.trace.max_balance_residual <= 1e-10 * e0;
  r.monotone = r.trace.max_energy_increase <= 1e-12;

  auto csv = open_output(dir / "trace.csv");
  write_trace_csv(csv, r.trace, cfg.raw(), fields({{"h", gen.mesh_h()}, {"dt", cmd.dt}, {"T", T}}));
  auto gp = open_output(dir / "trace.gp");
  write_trace_plot(gp, cfg.raw(), "trace.csv", !equal);
  out << "steps: " << r.trace.steps << '\n'
      << "E(0): " << format_double(e0) << '\n'
      << "E(T): " << format_double(r.trace.energies.back()) << '\n'
      << "max balance residual: " << format_double(r.trace.max_balance_residual) << '\n';
  return r;
}

DecayClassification run_decay(const TraceRun& run, const SystemConfig& raw, const fs::path& dir,
                              std::ostream& out) {
  const DecayClassification c = classify_decay(run.trace);
  json report = classification_to_json(c);
  report["config"] = config_to_json(raw);
  report["regime"] = run.trace.config_tag;
  report["initial_graph_norm"] = run.trace.initial_graph_norm;
  auto js = open_output(dir / "decay.json");
  js << report.dump(2) << '\n';
  out << "verdict: " << to_string(c.verdict);
  if (c.verdict != Verdict::inconclusive) out << '(' << format_double(c.value) << ')';
  out << '\n';
  if (c.exponential) {
    out << "exponential fit: rate " << format_double(c.exponential->rate) << ", R^2 "
        << format_double(c.exponential->r_squared) << '\n';
  }
  if (c.polynomial) {
    out << "polynomial fit: slope " << format_double(c.polynomial->rate) << ", R^2 "
        << format_double(c.polynomial->r_squared) << ", tE/|U0|^2 max/min "
        << format_double(c.polynomial->poly_ratio) << '\n';
  }
  return c;
}

int verb_validate(const ValidatedConfig& cfg, std::ostream& out) {
  out << "C0: " << format_double(cfg.poincare()) << '\n'
      << "coercivity margin: " << format_double(cfg.coercivity_margin()) << '\n'
      << "paper regime: " << (cfg.paper_regime() ? "yes" : "no") << '\n';
  for (const auto& w : cfg.warnings()) out << "warning: " << w << '\n';
  return kExitOk;
}

int verb_poincare(const ValidatedConfig& cfg, const Command& cmd, std::ostream& out) {
  const double c0 = cfg.poincare();
  const double h = std::min(cmd.h, cfg.raw().L0);
  const double discrete = discrete_poincare_constant(cfg.raw().L0, h);
  out << "C0: " << format_double(c0) << '\n'
      << "discrete C0 (h " << format_double(h) << "): " << format_double(discrete) << '\n'
      << "relative difference: " << format_double(std::abs(discrete - c0) / c0) << '\n'
      << "|c1| C0: " << format_double(std::abs(cfg.raw().c1) * c0) << '\n';
  return kExitOk;
}

int verb_static(const ValidatedConfig& cfg, const Command& cmd, std::ostream& out) {
  const StaticProblem p = manufactured_static_problem(cfg);
  auto csv = open_output(cmd.output_dir / "static.csv");
  write_header(csv, cfg.raw());
  csv << "h,l2_error,flux_jump,residual\n";
  double prev_h = 0.0, prev_err = 0.0, prev_jump = 0.0;
  bool ok = true;
  for (int level = 0; level < 3; ++level) {
    const double h_target = cmd.h / std::pow(2.0, level);
    const GeneratorOperator gen(cfg, h_target);
    const StateVector f = load_forcing(gen, p.f_w, p.f_s);
    const StateVector u = gen.static_solve(f);
    const double err_w = l2_error(gen.mesh(), u.p_w(), p.w);
    const double err_s = l2_error(gen.mesh(), u.p_s(), p.s);
    const double err = std::hypot(err_w, err_s);
    const double jump = std::abs(interface_flux_jump(gen, u));
    const double res = static_residual(gen, u, f);
    ok = ok && res <= 1e-10;
    const double h = gen.mesh_h();
    csv << format_double(h) << ',' << format_double(err) << ',' << format_double(jump) << ','
        << format_double(res) << '\n';
    out << "h " << format_double(h) << ": L2 error " << format_double(err) << ", flux jump "
        << format_double(jump) << ", residual " << format_double(res);
    if (level > 0) {
      out << ", orders " << format_double(std::log(prev_err / err) / std::log(prev_h / h)) << " / "
          << format_double(std::log(prev_jump / jump) / std::log(prev_h / h));
    }
    out << '\n';
    prev_h = h;
    prev_err = err;
    prev_jump = jump;
  }
  return ok ? kExitOk : kExitFinding;
}

void export_matrices(const GeneratorOperator& gen, const fs::path& dir) {
  const SystemMatrices& m = gen.matrices();
  const std::pair<const char*, const SparseMatrix*> all[] = {
      {"mass", &m.mass},           {"stiffness_w", &m.stiffness_w},
      {"stiffness_s", &m.stiffness_s}, {"coupling_c1", &m.coupling_c1},
      {"coupling_c2", &m.coupling_c2}, {"damping_d1", &m.damping_d1},
      {"damping_d2", &m.damping_d2},   {"gram", &gen.gram().matrix()}};
  for (const auto& [name, mat] : all) {
    auto f = open_output(dir / "matrices" / (std::string(name) + ".txt"));
    f << "# " << mat->rows() << " x " << mat->cols() << '\n';
    write_triplets(f, *mat);
  }
}

int verb_regimes(const SystemConfig& base, const Command& cmd, std::ostream& out,
                 std::ostream& err) {
  const double alt = base.a2 != 1.0 ? base.a2 : 2.0;
  json report = json::array();
  bool ok = true;
  for (const double a2 : {1.0, alt}) {
    SystemConfig raw = base;
    raw.a2 = a2;
    const ValidatedConfig cfg = validate_config(raw);
    const GeneratorOperator gen(cfg, cmd.h);
    const fs::path dir = cmd.output_dir / ("a2_" + format_double(a2));
    out << "== a2 = " << format_double(a2) << " ==\n";
    const SpectrumCheck spec = run_spectrum(gen, cmd, dir, out);
    const bool equal = gen.regime() == Regime::a2_equal_1;
    const double lmax = cmd.lambda_max.value_or(equal ? 50.0 : frequency_cutoff(gen.mesh_h()));
    const ResolventSamples res =
        run_resolvent(gen, cmd.lambda_min, lmax, cmd.lambda_points, dir, out, err);
    const TraceRun run = run_trace(gen, cmd, dir, out);
    const DecayClassification dec = run_decay(run, raw, dir, out);
    ok = ok && spec.dissipative && run.balanced && run.monotone;

    json r;
    r["a2"] = a2;
    r["regime"] = run.trace.config_tag;
    r["h"] = gen.mesh_h();
    r["spectral_abscissa"] = spec.result.spectral_abscissa;
    r["imag_axis_gap"] = spec.result.imag_axis_gap;
    r["resolvent"] = sweep_to_json(res);
    r["decay"] = classification_to_json(dec);
    r["max_balance_residual"] = run.trace.max_balance_residual;
    report.push_back(r);
  }
  json doc;
  doc["config"] = config_to_json(base);
  doc["runs"] = report;
  auto js = open_output(cmd.output_dir / "regimes.json");
  js << doc.dump(2) << '\n';

  out << "== comparison ==\n";
  for (const auto& r : report) {
    out << "a2 = " << format_double(r["a2"].get<double>())
        << ": abscissa " << format_double(r["spectral_abscissa"].get<double>())
        << ", resolvent exponent "
        << format_double(r["resolvent"]["fitted_exponent"].get<double>())
        << ", decay " << r["decay"]["verdict"].get<std::string>();
    if (r["decay"].contains("value")) {
      out << '(' << format_double(r["decay"]["value"].get<double>()) << ')';
    }
    out << '\n';
  }
  return ok ? kExitOk : kExitFinding;
}

int dispatch(const Command& cmd, std::ostream& out, std::ostream& err) {
  const SystemConfig raw = load_config(cmd);
  if (cmd.verb == "regimes") return verb_regimes(raw, cmd, out, err);
  const ValidatedConfig cfg = validate_config(raw);
  for (const auto& w : cfg.warnings()) err << "warning: " << w << '\n';
  if (cmd.verb == "validate") return verb_validate(cfg, out);
  if (cmd.verb == "poincare") return verb_poincare(cfg, cmd, out);
  if (cmd.verb == "static-solve") return verb_static(cfg, cmd, out);

  const GeneratorOperator gen(cfg, cmd.h);
  if (cmd.export_matrices) export_matrices(gen, cmd.output_dir);
  if (cmd.verb == "spectrum") {
    const SpectrumCheck s = run_spectrum(gen, cmd, cmd.output_dir, out);
    if (!s.dissipative) err << "finding: eigenvalue with positive real part\n";
    if (!s.gap_positive) err << "finding: spectrum touches the imaginary axis\n";
    return s.dissipative && s.gap_positive ? kExitOk : kExitFinding;
  }
  if (cmd.verb == "resolvent") {
    run_resolvent(gen, cmd.lambda_min, cmd.lambda_max.value_or(50.0), cmd.lambda_points,
                  cmd.output_dir, out, err);
    return kExitOk;
  }
  if (cmd.verb == "simulate" || cmd.verb == "decay") {
    const TraceRun run = run_trace(gen, cmd, cmd.output_dir, out);
    if (cmd.verb == "decay") run_decay(run, raw, cmd.output_dir, out);
    if (!run.balanced) err << "finding: energy balance residual above 1e-10 E(0)\n";
    if (!run.monotone) err << "finding: energy increased during the run\n";
    return run.balanced && run.monotone ? kExitOk : kExitFinding;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown verb '" + cmd.verb + "'");
}

}  // namespace

int run_command(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(cmd, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace twowave
