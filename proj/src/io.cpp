#include "twowave/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace twowave {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 8> kScalarKeys{"L0", "L", "a1", "a2", "d1", "d2", "c1", "c2"};
constexpr std::array<const char*, 2> kArrayKeys{"alpha", "beta"};

double* scalar_slot(SystemConfig& c, std::string_view key) {
  if (key == "L0") return &c.L0;
  if (key == "L") return &c.L;
  if (key == "a1") return &c.a1;
  if (key == "a2") return &c.a2;
  if (key == "d1") return &c.d1;
  if (key == "d2") return &c.d2;
  if (key == "c1") return &c.c1;
  if (key == "c2") return &c.c2;
  return nullptr;
}

std::array<double, 4>* array_slot(SystemConfig& c, std::string_view key) {
  if (key == "alpha") return &c.alpha;
  if (key == "beta") return &c.beta;
  return nullptr;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ", ";
    s += x;
  }
  return s;
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [end, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || end != last || text.empty()) {
    throw Error(ErrorCode::ParseError,
                std::string(key) + ": cannot read '" + std::string(text) + "' as a number");
  }
  return v;
}

void csv_row(std::ostream& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out << ',';
    out << c;
    first = false;
  }
  out << '\n';
}

}  // namespace

SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  std::vector<std::string> unknown;
  for (const auto& [key, value] : j.items()) {
    SystemConfig probe;
    if (!scalar_slot(probe, key) && !array_slot(probe, key)) unknown.push_back(key);
  }
  if (!unknown.empty()) throw Error(ErrorCode::UnknownKey, join(unknown));
  std::vector<std::string> missing;
  for (const char* k : kScalarKeys) {
    if (!j.contains(k)) missing.emplace_back(k);
  }
  for (const char* k : kArrayKeys) {
    if (!j.contains(k)) missing.emplace_back(k);
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingKey, join(missing));

  SystemConfig c;
  for (const char* k : kScalarKeys) {
    const json& v = j.at(k);
    if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string(k) + ": expected a number");
    *scalar_slot(c, k) = v.get<double>();
  }
  for (const char* k : kArrayKeys) {
    const json& v = j.at(k);
    if (!v.is_array() || v.size() != 4 ||
        !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      throw Error(ErrorCode::ParseError, std::string(k) + ": expected an array of 4 numbers");
    }
    auto* slot = array_slot(c, k);
    for (std::size_t i = 0; i < 4; ++i) (*slot)[i] = v[i].get<double>();
  }
  return c;
}

SystemConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const SystemConfig& c) {
  json j;
  j["L0"] = c.L0;
  j["L"] = c.L;
  j["a1"] = c.a1;
  j["a2"] = c.a2;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  return j;
}

void apply_override(SystemConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "override '" + std::string(assignment) + "' needs key=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view value = assignment.substr(eq + 1);
  if (double* slot = scalar_slot(cfg, key)) {
    *slot = parse_number(key, value);
    return;
  }
  if (auto* slot = array_slot(cfg, key)) {
    std::array<double, 4> v{};
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const auto comma = std::min(value.find(',', pos), value.size());
      if (count == 4) throw Error(ErrorCode::ParseError, std::string(key) + ": expected 4 values");
      v[count++] = parse_number(key, value.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (count != 4) throw Error(ErrorCode::ParseError, std::string(key) + ": expected 4 values");
    *slot = v;
    return;
  }
  throw Error(ErrorCode::UnknownKey, std::string(key));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

void write_header(std::ostream& out, const SystemConfig& cfg, const HeaderFields& extra) {
  out << "# config: " << config_to_json(cfg).dump() << '\n';
  for (const auto& [k, v] : extra) out << "# " << k << ": " << v << '\n';
}

void write_eigenvalues_csv(std::ostream& out, const SpectrumResult& r, const SystemConfig& cfg,
                           const HeaderFields& extra) {
  write_header(out, cfg, extra);
  out << "re,im\n";
  for (const Complex& z : r.eigenvalues) csv_row(out, {format_double(z.real()), format_double(z.imag())});
}

void write_resolvent_csv(std::ostream& out, const ResolventSamples& s, const SystemConfig& cfg,
                         const HeaderFields& extra) {
  write_header(out, cfg, extra);
  out << "lambda,norm,is_envelope\n";
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    csv_row(out, {format_double(s.lambdas[i]), format_double(s.norms[i]),
                  s.is_envelope[i] ? "1" : "0"});
  }
}

void write_envelope_csv(std::ostream& out, const ResolventSamples& s, const SystemConfig& cfg,
                        const HeaderFields& extra) {
  write_header(out, cfg, extra);
  out << "lambda,envelope\n";
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    if (s.is_envelope[i]) csv_row(out, {format_double(s.lambdas[i]), format_double(s.envelope[i])});
  }
}

void write_trace_csv(std::ostream& out, const EnergyTrace& t, const SystemConfig& cfg,
                     const HeaderFields& extra) {
  HeaderFields fields = extra;
  fields.emplace_back("regime", t.config_tag);
  fields.emplace_back("initial_graph_norm", format_double(t.initial_graph_norm));
  write_header(out, cfg, fields);
  out << "t,E,balance_residual\n";
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    csv_row(out, {format_double(t.times[i]), format_double(t.energies[i]),
                  format_double(t.balance_residuals[i])});
  }
}

void write_snapshot_csv(std::ostream& out, const Mesh& mesh, const StateVector& u, double t,
                        const SystemConfig& cfg) {
  write_header(out, cfg, {{"t", format_double(t)}});
  out << "x,u_w,u_s,v_w,v_s\n";
  const std::size_t last = mesh.nodes.size() - 1;
  for (std::size_t node = 0; node <= last; ++node) {
    if (node == 0 || node == last) {
      csv_row(out, {format_double(mesh.nodes[node]), "0", "0", "0", "0"});
      continue;
    }
    const auto i = static_cast<Index>(node) - 1;
    csv_row(out, {format_double(mesh.nodes[node]), format_double(u.p_w()[i]),
                  format_double(u.p_s()[i]), format_double(u.q_w()[i]),
                  format_double(u.q_s()[i])});
  }
}

json fit_to_json(const DecayFit& f) {
  json j;
  j["model"] = std::string(to_string(f.model));
  j[f.model == DecayModel::exponential ? "rate" : "slope"] = f.rate;
  j["intercept"] = f.intercept;
  j["r_squared"] = f.r_squared;
  j["window"] = {f.window.t_start, f.window.t_end};
  j["samples"] = f.samples;
  if (f.model == DecayModel::polynomial) {
    j["poly_bound"] = std::isfinite(f.poly_bound) ? json(f.poly_bound) : json(nullptr);
    j["poly_ratio"] = std::isfinite(f.poly_ratio) ? json(f.poly_ratio) : json(nullptr);
    j["steepening"] = std::isfinite(f.steepening) ? json(f.steepening) : json(nullptr);
    j["non_polynomial"] = f.non_polynomial;
  }
  return j;
}

json classification_to_json(const DecayClassification& c) {
  json j;
  j["verdict"] = std::string(to_string(c.verdict));
  if (c.verdict != Verdict::inconclusive) j["value"] = c.value;
  j["window"] = {c.window.t_start, c.window.t_end};
  j["exponential"] = c.exponential ? fit_to_json(*c.exponential) : json(nullptr);
  j["polynomial"] = c.polynomial ? fit_to_json(*c.polynomial) : json(nullptr);
  return j;
}

json sweep_to_json(const ResolventSamples& s) {
  json j;
  j["fitted_exponent"] = s.fitted_exponent;
  j["fit_intercept"] = s.fit_intercept;
  j["r_squared"] = s.r_squared;
  j["valid_band"] = {s.band_min, s.band_max};
  j["samples"] = s.lambdas.size();
  j["envelope_points"] = s.envelope_points();
  j["dropped_points"] = s.dropped_points;
  j["near_singular"] = s.any_near_singular();
  return j;
}

void write_resolvent_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv,
                          const std::string& envelope_csv) {
  write_header(out, cfg);
  out << "set datafile separator ','\n"
         "set logscale xy\n"
         "set xlabel 'lambda'\n"
         "set ylabel 'resolvent norm'\n"
         "plot '"
      << csv << "' using 1:2 with lines title 'norm', \\\n     '" << envelope_csv
      << "' using 1:2 with linespoints title 'envelope'\n";
}

void write_eigenvalue_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv) {
  write_header(out, cfg);
  out << "set datafile separator ','\n"
         "set xlabel 'Re'\n"
         "set ylabel 'Im'\n"
         "plot '"
      << csv << "' using 1:2 with points pt 7 ps 0.5 title 'eigenvalues'\n";
}

void write_trace_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv,
                      bool log_time) {
  write_header(out, cfg);
  out << "set datafile separator ','\n"
      << (log_time ? "set logscale xy\n" : "set logscale y\n")
      << "set xlabel 't'\n"
         "set ylabel 'E'\n"
         "plot '"
      << csv << "' using 1:2 with lines title 'energy'\n";
}

}  // namespace twowave
