#include "twowave/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twowave {

namespace {

constexpr double kEnergyFloor = 1e-300;

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.intercept + l.slope * x[i]);
    ss_res += r * r;
  }
  if (syy > 0.0) {
    l.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    l.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return l;
}

bool inside(double t, TimeWindow w) { return t >= w.t_start && t <= w.t_end; }

}  // namespace

std::string_view to_string(DecayModel m) {
  return m == DecayModel::exponential ? "exponential" : "polynomial";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::exponential: return "Exponential";
    case Verdict::polynomial: return "Polynomial";
    case Verdict::inconclusive: break;
  }
  return "Inconclusive";
}

DecayFit fit_exponential(const EnergyTrace& trace, TimeWindow window) {
  std::size_t in_window = 0;
  std::vector<double> t, y;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (!inside(trace.times[i], window)) continue;
    ++in_window;
    if (trace.energies[i] > kEnergyFloor) {
      t.push_back(trace.times[i]);
      y.push_back(std::log(trace.energies[i]));
    }
  }
  if (in_window < 20) {
    throw Error(ErrorCode::WindowTooSmall,
                "exponential fit needs 20 samples, window has " + std::to_string(in_window));
  }
  if (t.size() < 20) {
    throw Error(ErrorCode::EnergyUnderflow, "fewer than 20 samples above 1e-300");
  }
  const Line l = least_squares(t, y);
  DecayFit f;
  f.model = DecayModel::exponential;
  f.rate = -l.slope;
  f.intercept = l.intercept;
  f.r_squared = l.r_squared;
  f.window = {t.front(), t.back()};
  f.samples = t.size();
  return f;
}

DecayFit fit_polynomial(const EnergyTrace& trace, TimeWindow window) {
  std::vector<double> t, e;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] > 0.0 && inside(trace.times[i], window) &&
        trace.energies[i] > kEnergyFloor) {
      t.push_back(trace.times[i]);
      e.push_back(trace.energies[i]);
    }
  }
  if (t.size() < 3 || t.back() < 100.0 * t.front()) {
    throw Error(ErrorCode::WindowTooSmall, "polynomial fit needs two decades of samples");
  }
  std::vector<double> x(t.size()), y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    x[i] = std::log(t[i]);
    y[i] = std::log(e[i]);
  }
  const Line l = least_squares(x, y);
  DecayFit f;
  f.model = DecayModel::polynomial;
  f.rate = l.slope;
  f.intercept = l.intercept;
  f.r_squared = l.r_squared;
  f.window = {t.front(), t.back()};
  f.samples = t.size();

  const double g2 = trace.initial_graph_norm * trace.initial_graph_norm;
  if (g2 > 0.0) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = t[i] * e[i] / g2;
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    f.poly_bound = hi;
    f.poly_ratio = hi / lo;
  } else {
    f.poly_bound = std::numeric_limits<double>::quiet_NaN();
    f.poly_ratio = std::numeric_limits<double>::quiet_NaN();
  }

  // Slopes over the first and last decade of the window.
  auto decade_slope = [&](double a, double b) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= a && t[i] <= b) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
      }
    }
    return xs.size() >= 2 ? least_squares(xs, ys).slope : l.slope;
  };
  const double first = decade_slope(t.front(), 10.0 * t.front());
  const double last = decade_slope(t.back() / 10.0, t.back());
  f.steepening = first != 0.0 ? last / first : std::numeric_limits<double>::infinity();
  f.non_polynomial = f.steepening > 2.0;
  return f;
}

TimeWindow tail_window(const EnergyTrace& trace) {
  const auto first = std::find_if(trace.times.begin(), trace.times.end(),
                                  [](double t) { return t > 0.0; });
  if (first == trace.times.end()) {
    throw Error(ErrorCode::WindowTooSmall, "trace has no positive sample times");
  }
  const double a = std::log(*first);
  const double b = std::log(trace.times.back());
  return {std::exp(a + 0.4 * (b - a)), trace.times.back()};
}

DecayClassification classify_decay(const EnergyTrace& trace) {
  DecayClassification c;
  try {
    c.window = tail_window(trace);
  } catch (const Error&) {
    return c;
  }
  try {
    c.exponential = fit_exponential(trace, c.window);
  } catch (const Error&) {
  }
  try {
    c.polynomial = fit_polynomial(trace, c.window);
  } catch (const Error&) {
  }
  const double re = c.exponential ? c.exponential->r_squared : 0.0;
  const double rp = c.polynomial ? c.polynomial->r_squared : 0.0;
  if (c.exponential && re >= 0.98 && re - rp >= 0.02 && c.exponential->rate > 0.0) {
    c.verdict = Verdict::exponential;
    c.value = c.exponential->rate;
  } else if (c.polynomial && rp >= 0.98 && rp - re >= 0.02 && c.polynomial->rate < 0.0) {
    c.verdict = Verdict::polynomial;
    c.value = c.polynomial->rate;
  }
  return c;
}

}  // namespace twowave
