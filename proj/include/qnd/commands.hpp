#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qnd/config_io.hpp"

namespace qnd {

struct CommandOptions {
  int workers = 0;             ///< 0: QNDSIM_WORKERS or hardware concurrency
  std::ostream* log = nullptr;  ///< progress and warnings
};

struct CommandResult {
  std::vector<std::filesystem::path> files;  ///< written, in order
  nlohmann::json summary;
};

/// Runs one command into manifest.output_dir, writing manifest.json and
/// config.txt next to its outputs. Re-running the written manifest reproduces
/// the CSV outputs byte for byte.
CommandResult run_command(const RunManifest& manifest, const CommandOptions& options = {});

/// Runs every step of a figure preset into out_dir/<step>, each with its own
/// manifest, and writes out_dir/figure.json.
CommandResult run_figure(std::string_view name, const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed, const std::string& created_at,
                         const CommandOptions& options = {});

}  // namespace qnd
