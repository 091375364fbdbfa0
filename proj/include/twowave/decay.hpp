#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "twowave/timestep.hpp"

namespace twowave {

enum class DecayModel { exponential, polynomial };

std::string_view to_string(DecayModel m);

struct TimeWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  /// Exponential: rate eps with E ~ exp(-eps t). Polynomial: slope s with E ~ t^s.
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  TimeWindow window;
  std::size_t samples = 0;
  /// Polynomial only: sup and max/min of t E(t) / ||U0||^2_D(A) over the window.
  double poly_bound = 0.0;
  double poly_ratio = 0.0;
  /// Polynomial only: slope over the last decade of the window divided by the
  /// slope over the first. Close to 1 for a power law, large for exp(-t).
  double steepening = 0.0;
  bool non_polynomial = false;
};

/// Least squares on (t, log E). At least 20 samples in the window
/// (WindowTooSmall), at least 20 of them above 1e-300 (EnergyUnderflow).
DecayFit fit_exponential(const EnergyTrace& trace, TimeWindow window);

/// Least squares on (log t, log E). The window must span two decades of
/// sampled t > 0 (WindowTooSmall).
DecayFit fit_polynomial(const EnergyTrace& trace, TimeWindow window);

/// Last 60% of the trace in log-time, counted from the first positive sample.
TimeWindow tail_window(const EnergyTrace& trace);

enum class Verdict { exponential, polynomial, inconclusive };

std::string_view to_string(Verdict v);

struct DecayClassification {
  Verdict verdict = Verdict::inconclusive;
  double value = 0.0;  // rate or slope of the declared model
  TimeWindow window;
  std::optional<DecayFit> exponential;
  std::optional<DecayFit> polynomial;
};

/// Fits both models on the tail window. A model is declared when its R^2 is
/// at least 0.98 and beats the other by 0.02, and its rate is positive
/// (slope negative); anything else is inconclusive.
DecayClassification classify_decay(const EnergyTrace& trace);

}  // namespace twowave
