// Command-line front end: one subcommand per experiment, plus figure presets.
//
//   simulate trajectory --config run.cfg --out out/traj
//   simulate jumps --preset fig4 --out out/fig4 --seed 7
//   simulate filter --config run.cfg --record out/traj/record.csv --out out/filt
//   simulate trajectory --manifest out/traj/manifest.json --out out/again
//   simulate figure fig3 --out out/fig3

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qnd/commands.hpp"
#include "qnd/output.hpp"
#include "qnd/presets.hpp"

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::string manifest;
  std::string record;
  std::string truth;
  int workers = 0;
};

qnd::SimulationConfig preset_config(const std::string& name, qnd::Command command) {
  const qnd::Preset p = qnd::make_preset(name);
  for (const auto& step : p.steps) {
    if (step.command == command) {
      return step.config;
    }
  }
  throw std::invalid_argument("preset " + name + " has no " + qnd::to_string(command) + " step");
}

qnd::RunManifest build_manifest(qnd::Command command, const Args& a) {
  qnd::RunManifest m;
  if (!a.manifest.empty()) {
    m = qnd::manifest_from_json(qnd::read_json(a.manifest));
    if (m.command != command) {
      throw std::invalid_argument("manifest is for '" + qnd::to_string(m.command) + "', not '" +
                                  qnd::to_string(command) + "'");
    }
  } else {
    if (!a.preset.empty() && !a.config.empty()) {
      throw std::invalid_argument("give either --config or --preset, not both");
    }
    m.command = command;
    m.preset = a.preset;
    if (!a.preset.empty()) {
      m.config = preset_config(a.preset, command);
    } else if (!a.config.empty()) {
      m.config = qnd::load_config(a.config);
    } else {
      m.config = qnd::parse_config("");
    }
    m.created_at = utc_now();
    m.tool_version = std::string(qnd::kToolVersion);
  }
  if (!a.out.empty()) {
    m.output_dir = a.out;
  }
  if (m.output_dir.empty()) {
    throw std::invalid_argument("--out is required");
  }
  if (a.seed) {
    m.config.seed = *a.seed;
  }
  if (!a.record.empty()) {
    m.record_file = a.record;
  }
  if (!a.truth.empty()) {
    m.truth_file = a.truth;
  }
  return m;
}

const char* describe(qnd::Command c) {
  switch (c) {
    case qnd::Command::trajectory:
      return "one conditioned trajectory plus its measurement record";
    case qnd::Command::unconditional:
      return "ensemble-average master equation";
    case qnd::Command::ensemble:
      return "n_trajectories runs, mean/std per sample and a purity fit";
    case qnd::Command::sweep:
      return "purity time constant for each of k_values";
    case qnd::Command::jumps:
      return "informed run with bath jumps, then the filter on its record";
    case qnd::Command::filter:
      return "rebuild the state from a recorded dY";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditioned dynamics of a qubit-oscillator system under continuous weak measurement"};
  app.require_subcommand(1);
  Args args;
  std::uint64_t seed_value = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", seed_value, "override the configured seed")
        ->each([&](const std::string&) { args.seed = seed_value; });
    sub->add_option("--workers", args.workers, "worker threads (default: QNDSIM_WORKERS)");
  };

  std::optional<qnd::Command> chosen;
  for (qnd::Command c : {qnd::Command::trajectory, qnd::Command::unconditional,
                         qnd::Command::ensemble, qnd::Command::sweep, qnd::Command::jumps,
                         qnd::Command::filter}) {
    CLI::App* sub = app.add_subcommand(qnd::to_string(c), describe(c));
    common(sub);
    sub->add_option("--config", args.config, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--preset", args.preset, "take the configuration from a figure preset");
    sub->add_option("--manifest", args.manifest, "re-run a previous manifest.json")
        ->check(CLI::ExistingFile);
    if (c == qnd::Command::filter) {
      sub->add_option("--record", args.record, "record CSV written by a generator run")
          ->check(CLI::ExistingFile);
      sub->add_option("--truth", args.truth, "trajectory CSV to compare against")
          ->check(CLI::ExistingFile);
    }
    sub->callback([&chosen, c] { chosen = c; });
  }

  std::string figure_name;
  CLI::App* figure = app.add_subcommand("figure", "run a figure preset");
  figure->add_option("name", figure_name, "fig1, fig2a, fig2c, fig2e, fig3, fig4 or fig5")
      ->required();
  common(figure);

  CLI11_PARSE(app, argc, argv);

  qnd::CommandOptions options;
  options.log = &std::cerr;
  try {
    options.workers = args.workers;
    if (figure->parsed()) {
      if (args.out.empty()) {
        throw std::invalid_argument("--out is required");
      }
      qnd::run_figure(figure_name, args.out, args.seed, utc_now(), options);
    } else {
      qnd::run_command(build_manifest(*chosen, args), options);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
