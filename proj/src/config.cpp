#include "twowave/config.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace twowave {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::NonpositiveCoefficient: return "NonpositiveCoefficient";
    case ErrorCode::CoercivityViolation: return "CoercivityViolation";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonpositiveLength: return "NonpositiveLength";
    case ErrorCode::HTooCoarse: return "HTooCoarse";
    case ErrorCode::IndefiniteGram: return "IndefiniteGram";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SizeExceeded: return "SizeExceeded";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::BandTooNarrow: return "BandTooNarrow";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::EnergyUnderflow: return "EnergyUnderflow";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::InterfaceMismatch: return "InterfaceMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MissingKey: return "MissingKey";
  }
  return "Unknown";
}

SystemConfig default_config(double a2) {
  SystemConfig cfg;
  cfg.a2 = a2;
  return cfg;
}

double poincare_constant(double L0) {
  if (!(L0 > 0.0) || !std::isfinite(L0)) {
    throw Error(ErrorCode::NonpositiveLength, "L0 must be a positive finite length");
  }
  const double r = L0 / std::numbers::pi;
  return r * r;
}

PiecewiseCoefficient ValidatedConfig::coefficient(Coefficient which) const {
  const auto& a = raw_.alpha;
  const auto& b = raw_.beta;
  switch (which) {
    case Coefficient::d1: return {a[1], a[3], raw_.d1};
    case Coefficient::c1: return {a[0], a[2], raw_.c1};
    case Coefficient::d2: return {b[1], b[3], raw_.d2};
    case Coefficient::c2: return {b[0], b[2], raw_.c2};
  }
  return {};
}

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not finite");
  }
}

}  // namespace

ValidatedConfig validate_config(const SystemConfig& raw) {
  require_finite(raw.L0, "L0");
  require_finite(raw.L, "L");
  require_finite(raw.a1, "a1");
  require_finite(raw.a2, "a2");
  require_finite(raw.d1, "d1");
  require_finite(raw.d2, "d2");
  require_finite(raw.c1, "c1");
  require_finite(raw.c2, "c2");
  for (double v : raw.alpha) require_finite(v, "alpha");
  for (double v : raw.beta) require_finite(v, "beta");

  // 0 < a1 < a2 < a3 < a4 < L0 < b1 < b2 < b3 < b4 < L
  const std::array<double, 11> chain{0.0,         raw.alpha[0], raw.alpha[1], raw.alpha[2],
                                     raw.alpha[3], raw.L0,       raw.beta[0],  raw.beta[1],
                                     raw.beta[2],  raw.beta[3],  raw.L};
  static constexpr std::array<const char*, 11> names{"0",     "alpha1", "alpha2", "alpha3",
                                                     "alpha4", "L0",     "beta1",  "beta2",
                                                     "beta3",  "beta4",  "L"};
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (!(chain[i] < chain[i + 1])) {
      std::ostringstream msg;
      msg << "breakpoint chain broken: " << names[i] << " = " << chain[i]
          << " is not < " << names[i + 1] << " = " << chain[i + 1];
      throw Error(ErrorCode::OrderingViolation, msg.str());
    }
  }

  if (!(raw.a1 > 0.0)) throw Error(ErrorCode::NonpositiveCoefficient, "a1 must be > 0");
  if (!(raw.a2 > 0.0)) throw Error(ErrorCode::NonpositiveCoefficient, "a2 must be > 0");
  if (raw.d1 < 0.0) throw Error(ErrorCode::NonpositiveCoefficient, "d1 must be >= 0");
  if (raw.d2 < 0.0) throw Error(ErrorCode::NonpositiveCoefficient, "d2 must be >= 0");

  const double c0 = poincare_constant(raw.L0);
  if (!(std::abs(raw.c1) < 1.0 / c0)) {
    std::ostringstream msg;
    msg << "|c1| = " << std::abs(raw.c1) << " must be < 1/C0 = " << 1.0 / c0;
    throw Error(ErrorCode::CoercivityViolation, msg.str());
  }

  ValidatedConfig out;
  out.raw_ = raw;
  out.poincare_ = c0;
  if (raw.d1 != 0.0) {
    out.warnings_.push_back("NonPaperRegime: d1 != 0, stability claims are unverified");
  }
  if (raw.d2 == 0.0) {
    out.warnings_.push_back("NonPaperRegime: d2 == 0, the system is not damped");
  }
  if (raw.c1 == 0.0) {
    out.warnings_.push_back("NonPaperRegime: c1 == 0, the first pair is uncoupled");
  }
  if (raw.c2 == 0.0) {
    out.warnings_.push_back("NonPaperRegime: c2 == 0, the second pair is uncoupled");
  }
  return out;
}

ValidatedConfig validate_config(const ValidatedConfig& cfg) { return cfg; }

double coefficient_at(const ValidatedConfig& cfg, Coefficient which, double x) {
  if (!(x >= 0.0 && x <= cfg.raw().L)) {
    throw Error(ErrorCode::OutOfDomain, "x = " + std::to_string(x) + " outside [0, L]");
  }
  return cfg.coefficient(which)(x);
}

}  // namespace twowave
