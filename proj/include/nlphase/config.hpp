#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlphase/measure.hpp"
#include "nlphase/phase_map.hpp"
#include "nlphase/quadrature.hpp"
#include "nlphase/repdisc.hpp"
#include "nlphase/spectrum.hpp"

namespace nlphase {

using Json = nlohmann::json;

/// A parsed experiment config. Unknown keys anywhere in the document are rejected.
///
/// Top level: command, description, measure, phase, spectrum, quad, seed, out, options, group.
struct RunConfig {
  std::string command;
  std::string description;
  std::optional<Measure> measure;
  std::optional<PhaseMap> phase;
  std::optional<SpectrumSet> spectrum;
  QuadratureSpec quad = TensorGauss{};
  std::uint64_t seed = 0;
  std::string out;
  Json options = Json::object();
  std::optional<GroupData> group;
  Json raw;
};

RunConfig parse_config(const Json& j);
/// Parses JSON text; syntax errors become ConfigError with the byte position.
RunConfig parse_config_text(const std::string& text);

Measure parse_measure(const Json& j);
PhaseMap parse_phase(const Json& j);
SpectrumSet parse_spectrum(const Json& j);
QuadratureSpec parse_quad(const Json& j);
GroupData parse_group(const Json& j);
Box parse_box(const Json& j, const std::string& where);

/// A number, or a closed expression such as "1/(exp(0.5)-exp(-0.5))".
double parse_scalar(const Json& j, const std::string& where);
Vec parse_vec(const Json& j, const std::string& where);
Mat parse_mat(const Json& j, const std::string& where);

/// Rejects any key of the object j not listed in `allowed`.
void require_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where);

/// Presets compiled into the binary from presets/*.json.
std::vector<std::string> preset_names();
std::optional<std::string> preset_text(const std::string& name);

}  // namespace nlphase
