#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

#include "qnd/sme.hpp"

namespace qnd {

/// Parses a flat key-value configuration document:
///
///     # comment
///     k = 0.1
///     jump_schedule = 25:up, 40:down
///     k_values = 0.1, 1, 10
///
/// Omitted keys take their defaults (g = 1, omega = 0, eta = 1, n_max = 25,
/// thermal n_bar = 3, qubit = e). When dt is omitted it is 1e-3/g for k <= g
/// and 1e-4/g above; when sample_every is omitted it is chosen so samples are
/// 0.05/g apart. Unknown keys and invalid values raise ConfigError.
SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& file);

/// Writes every key explicitly, with full precision; parse_config inverts it.
std::string serialize_config(const SimulationConfig& cfg);

/// Stable FNV-1a hash (hex) of serialize_config(cfg).
std::string config_hash(const SimulationConfig& cfg);

nlohmann::json config_to_json(const SimulationConfig& cfg);
SimulationConfig config_from_json(const nlohmann::json& j);

std::string to_string(JumpDirection d);
std::string format_jump_schedule(const std::vector<JumpEvent>& schedule);

enum class Command { trajectory, unconditional, ensemble, sweep, jumps, filter };

std::string to_string(Command c);
Command parse_command(std::string_view name);

/// Everything needed to re-run a command.
struct RunManifest {
  Command command = Command::trajectory;
  SimulationConfig config;
  std::string output_dir;
  std::string created_at;
  std::string tool_version;
  std::string preset;  ///< empty unless the run came from a figure preset
  std::string record_file;  ///< filter input
  std::string truth_file;   ///< optional filter reference

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

inline constexpr std::string_view kToolVersion = "0.3.1";

}  // namespace qnd
