#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twowave/config.hpp"
#include "twowave/decay.hpp"
#include "twowave/spectrum.hpp"
#include "twowave/timestep.hpp"

namespace twowave {

/// Reads a JSON config with exactly the keys
/// L0, L, a1, a2, d1, d2, c1, c2 (numbers) and alpha, beta (4 numbers each).
/// ParseError (bad JSON or a wrongly typed value, naming the key),
/// UnknownKey, MissingKey (listing every missing key).
SystemConfig parse_config(const std::filesystem::path& path);
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);

/// Applies "key=value"; alpha and beta take four comma-separated numbers.
void apply_override(SystemConfig& cfg, std::string_view assignment);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// Extra "# key: value" lines after the config line of a file header.
using HeaderFields = std::vector<std::pair<std::string, std::string>>;

/// "# config: {...}" followed by the extra fields, each line starting with '#'.
void write_header(std::ostream& out, const SystemConfig& cfg, const HeaderFields& extra = {});

/// re,im per eigenvalue.
void write_eigenvalues_csv(std::ostream& out, const SpectrumResult& r, const SystemConfig& cfg,
                           const HeaderFields& extra = {});
/// lambda,norm,is_envelope per sample.
void write_resolvent_csv(std::ostream& out, const ResolventSamples& s, const SystemConfig& cfg,
                         const HeaderFields& extra = {});
/// lambda,envelope at the envelope points only.
void write_envelope_csv(std::ostream& out, const ResolventSamples& s, const SystemConfig& cfg,
                        const HeaderFields& extra = {});
/// t,E,balance_residual per sample.
void write_trace_csv(std::ostream& out, const EnergyTrace& t, const SystemConfig& cfg,
                     const HeaderFields& extra = {});
/// x,u_w,u_s,v_w,v_s over all nodes including the Dirichlet ends.
void write_snapshot_csv(std::ostream& out, const Mesh& mesh, const StateVector& u, double t,
                        const SystemConfig& cfg);

nlohmann::json fit_to_json(const DecayFit& f);
nlohmann::json classification_to_json(const DecayClassification& c);
nlohmann::json sweep_to_json(const ResolventSamples& s);

/// Gnuplot scripts reading the CSV files written next to them.
void write_resolvent_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv,
                          const std::string& envelope_csv);
void write_eigenvalue_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv);
void write_trace_plot(std::ostream& out, const SystemConfig& cfg, const std::string& csv,
                      bool log_time);

}  // namespace twowave
