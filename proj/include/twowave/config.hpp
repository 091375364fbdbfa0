#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "twowave/error.hpp"

namespace twowave {

/// Physical parameters of the two-chain transmission system.
///
/// Chain "w" carries (u on (0,L0), phi on (L0,L)) with speed-squared a1 | a2;
/// chain "s" carries (y on (0,L0), psi on (L0,L)) with unit speed. The four
/// localized coefficients live on:
///   d1 on (alpha2, alpha4), c1 on (alpha1, alpha3),
///   d2 on (beta2, beta4),   c2 on (beta1, beta3).
struct SystemConfig {
  double L0 = 1.0;
  double L = 2.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double d1 = 0.0;
  double d2 = 1.0;
  double c1 = 0.5;
  double c2 = 1.0;
  std::array<double, 4> alpha{0.1, 0.2, 0.3, 0.4};
  std::array<double, 4> beta{1.1, 1.2, 1.3, 1.4};

  bool operator==(const SystemConfig&) const = default;
};

/// Demo configuration; a2 = 1 gives the equal-speed regime, a2 = 2 the
/// mismatched one.
SystemConfig default_config(double a2 = 1.0);

enum class Coefficient { d1, c1, d2, c2 };

/// Open interval carrying a constant value; zero elsewhere (endpoints included).
struct PiecewiseCoefficient {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;

  double operator()(double x) const { return (x > lo && x < hi) ? value : 0.0; }
};

/// A configuration that passed validate_config. Immutable.
class ValidatedConfig {
 public:
  const SystemConfig& raw() const { return raw_; }
  /// Poincare constant C0 of (0, L0).
  double poincare() const { return poincare_; }
  /// 1 - |c1| C0; strictly positive for every validated config.
  double coercivity_margin() const { return 1.0 - std::abs(raw_.c1) * poincare_; }
  /// d1 == 0 and d2, c1, c2 nonzero: the regime where the stability claims apply.
  bool paper_regime() const { return warnings_.empty(); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  PiecewiseCoefficient coefficient(Coefficient which) const;

  bool operator==(const ValidatedConfig& o) const { return raw_ == o.raw_; }

 private:
  friend ValidatedConfig validate_config(const SystemConfig& raw);
  ValidatedConfig() = default;

  SystemConfig raw_;
  double poincare_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Checks breakpoint ordering, coefficient signs and |c1| < 1/C0.
/// Throws Error with OrderingViolation, NonpositiveCoefficient,
/// CoercivityViolation or InvalidArgument (non-finite input).
ValidatedConfig validate_config(const SystemConfig& raw);
ValidatedConfig validate_config(const ValidatedConfig& cfg);

/// Value of a localized coefficient at x in [0, L]; OutOfDomain otherwise.
double coefficient_at(const ValidatedConfig& cfg, Coefficient which, double x);

/// Smallest C0 with int |f|^2 <= C0 int |f'|^2 on H^1_0(0, L0), i.e. (L0/pi)^2.
double poincare_constant(double L0);

}  // namespace twowave
