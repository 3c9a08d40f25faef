#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qnd/config_io.hpp"

namespace qnd {

/// One command of a figure preset, run in its own subdirectory.
struct PresetStep {
  std::string subdir;
  Command command = Command::trajectory;
  SimulationConfig config;
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetStep> steps;
};

inline constexpr std::uint64_t kPresetSeed = 1;

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for an unknown name.
Preset make_preset(std::string_view name);

}  // namespace qnd
