#include "qnd/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "qnd/analysis.hpp"
#include "qnd/ensemble.hpp"
#include "qnd/output.hpp"
#include "qnd/presets.hpp"

namespace qnd {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Context {
  const RunManifest& manifest;
  const CommandOptions& options;
  fs::path dir;
  CommandResult result;

  void note(const std::string& line) const {
    if (options.log != nullptr) {
      *options.log << line << '\n';
    }
  }
  fs::path file(const std::string& name) {
    result.files.push_back(dir / name);
    return dir / name;
  }
};

ExtraColumn excitation_column(const TrajectoryRecord& r) {
  ExtraColumn col{"excitation", {}};
  for (std::size_t i = 0; i < r.size(); ++i) {
    col.values.push_back(r.mean_excitation(i));
  }
  return col;
}

std::vector<double> excitation_series(const TrajectoryRecord& r) {
  return excitation_column(r).values;
}

nlohmann::json jumps_to_json(const std::vector<JumpEvent>& jumps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& j : jumps) {
    out.push_back({{"time", j.time}, {"direction", to_string(j.direction)}});
  }
  return out;
}

std::vector<double> trace_distances(const std::vector<DensityMatrix>& a,
                                    const std::vector<DensityMatrix>& b) {
  std::vector<double> out;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    out.push_back(trace_distance(a[i], b[i]));
  }
  return out;
}

// Lag after each applied jump until the filtered total excitation stays within
// `band` of the informed one for `dwell`.
nlohmann::json detection_lags(const std::vector<JumpEvent>& jumps, const TrajectoryRecord& informed,
                              const TrajectoryRecord& filtered) {
  const auto a = excitation_series(informed);
  const auto b = excitation_series(filtered);
  std::vector<double> gap(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    gap[i] = b[i] - a[i];
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& j : jumps) {
    const auto lag = jump_detection(informed.times, gap, StepFunction{j.time, 0.0, 0.0});
    out.push_back(lag ? nlohmann::json(*lag) : nlohmann::json(nullptr));
  }
  return out;
}

void run_trajectory(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  Stopwatch clock;
  RunOptions opts;
  opts.keep_measurement = true;
  const GeneratorResult r = run_generator(cfg, opts);
  const double runtime = clock.seconds();
  write_trajectory_csv(ctx.file("trajectory.csv"), r.record);
  const auto sidecar = trajectory_sidecar(cfg, r.record, runtime);
  write_json(ctx.file("trajectory.json"), sidecar);
  write_record_csv(ctx.file("record.csv"), r.measurement);
  write_json(ctx.file("record.json"), sidecar);
  ctx.result.summary = sidecar;
}

void run_unconditional_command(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  Stopwatch clock;
  const GeneratorResult r = run_unconditional(cfg);
  write_trajectory_csv(ctx.file("unconditional.csv"), r.record);
  ctx.result.summary = trajectory_sidecar(cfg, r.record, clock.seconds());
  write_json(ctx.file("unconditional.json"), ctx.result.summary);
}

void run_ensemble_command(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  Stopwatch clock;
  EnsembleAccumulator acc;
  run_ensemble(
      cfg, static_cast<std::size_t>(cfg.n_trajectories),
      [&](std::size_t i, GeneratorResult&& r) {
        acc.add(r.record);
        if ((i + 1) % 50 == 0) {
          ctx.note("  " + std::to_string(i + 1) + "/" + std::to_string(cfg.n_trajectories));
        }
      },
      ctx.options.workers);
  const EnsembleSummary summary = acc.summary();
  write_ensemble_csv(ctx.file("ensemble.csv"), summary);
  nlohmann::json j{{"config", config_to_json(cfg)},
                   {"n_trajectories", summary.n_trajectories},
                   {"seeds", summary.seeds},
                   {"runtime_seconds", clock.seconds()}};
  try {
    j["fit"] = fit_to_json(fit_purity(summary));
  } catch (const FitError& e) {
    j["fit"] = nullptr;
    j["fit_error"] = e.what();
  }
  write_json(ctx.file("ensemble.json"), j);
  ctx.result.summary = j;
}

void run_sweep_command(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  const auto entries = sweep_tau(cfg.k_values, cfg, cfg.n_trajectories, ctx.options.workers);
  for (const auto& e : entries) {
    if (e.summary.n_trajectories > 0) {
      char name[64];
      std::snprintf(name, sizeof name, "ensemble_k%g.csv", e.k);
      write_ensemble_csv(ctx.file(name), e.summary);
    }
    ctx.note("  k = " + format_value(e.k) +
             (e.fit ? ": tau = " + format_value(e.fit->tau) : ": " + e.error));
  }
  const auto j = sweep_to_json(entries);
  write_json(ctx.file("sweep.json"), j);
  ctx.result.summary = j;
}

void run_jumps_command(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  Stopwatch clock;
  RunOptions gen_opts;
  gen_opts.keep_measurement = true;
  gen_opts.keep_states = true;
  const GeneratorResult truth = run_generator(cfg, gen_opts);
  RunOptions filt_opts;
  filt_opts.keep_states = true;
  const FilterResult est = run_filter(truth.measurement, cfg, filt_opts);

  const ExtraColumn truth_cols[] = {excitation_column(truth.record)};
  write_trajectory_csv(ctx.file("informed.csv"), truth.record, truth_cols);
  const ExtraColumn filt_cols[] = {excitation_column(est.record),
                                   {"trace_distance", trace_distances(est.states, truth.states)}};
  write_trajectory_csv(ctx.file("filtered.csv"), est.record, filt_cols);
  write_record_csv(ctx.file("record.csv"), truth.measurement);
  const auto sidecar = trajectory_sidecar(cfg, truth.record, clock.seconds());
  write_json(ctx.file("record.json"), sidecar);

  nlohmann::json j = sidecar;
  j["jumps"] = jumps_to_json(truth.jumps);
  j["detection_lag"] = detection_lags(truth.jumps, truth.record, est.record);
  write_json(ctx.file("jumps.json"), j);
  ctx.result.summary = j;
}

void run_filter_command(Context& ctx) {
  const SimulationConfig& cfg = ctx.manifest.config;
  if (ctx.manifest.record_file.empty()) {
    throw std::invalid_argument("filter: no record file given");
  }
  const fs::path record_path = ctx.manifest.record_file;
  fs::path sidecar_path = record_path;
  sidecar_path.replace_extension(".json");
  std::optional<SimulationConfig> source;
  if (fs::exists(sidecar_path)) {
    source = config_from_json(read_json(sidecar_path).at("config"));
    if (source->k != cfg.k) {
      throw ConfigError("k", "record was generated with k = " + format_value(source->k) +
                                 " but the config has k = " + format_value(cfg.k) +
                                 "; refusing to filter");
    }
    if (source->dt != cfg.dt) {
      throw ConfigError("dt", "record was generated with dt = " + format_value(source->dt) +
                                  " but the config has dt = " + format_value(cfg.dt));
    }
  }
  const MeasurementRecord record = read_record_csv(record_path, cfg.n_steps());
  RunOptions filt_opts;
  filt_opts.keep_states = true;
  const FilterResult est = run_filter(record, cfg, filt_opts);

  std::vector<ExtraColumn> cols{excitation_column(est.record)};
  nlohmann::json j{{"config", config_to_json(cfg)}, {"record_file", record_path.string()}};

  // Reference states from regenerating the source run, when it reproduces the record exactly.
  if (source) {
    RunOptions gen_opts;
    gen_opts.keep_measurement = true;
    gen_opts.keep_states = true;
    const GeneratorResult truth = run_generator(*source, gen_opts);
    if (truth.measurement.dY == record.dY) {
      cols.push_back({"trace_distance", trace_distances(est.states, truth.states)});
      j["trace_distance_final"] = cols.back().values.back();
    } else {
      j["trace_distance_note"] = "source run did not reproduce the record";
    }
  }
  if (!ctx.manifest.truth_file.empty()) {
    const TrajectoryRecord truth = read_trajectory_csv(ctx.manifest.truth_file);
    if (truth.size() != est.record.size()) {
      throw SchemaError("t", ctx.manifest.truth_file + ": expected " +
                                 std::to_string(est.record.size()) + " rows, found " +
                                 std::to_string(truth.size()));
    }
    ExtraColumn ds{"abs_diff_sigma_ee", {}};
    ExtraColumn dn{"abs_diff_mean_n", {}};
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (std::abs(truth.times[i] - est.record.times[i]) > 1e-6) {
        throw SchemaError("t", ctx.manifest.truth_file + ": time grid differs from the filter's");
      }
      ds.values.push_back(std::abs(truth.sigma_ee[i] - est.record.sigma_ee[i]));
      dn.values.push_back(std::abs(truth.mean_n[i] - est.record.mean_n[i]));
    }
    j["truth_file"] = ctx.manifest.truth_file;
    j["abs_diff_mean_n_final"] = dn.values.back();
    j["abs_diff_sigma_ee_final"] = ds.values.back();
    cols.push_back(std::move(ds));
    cols.push_back(std::move(dn));
  }
  write_trajectory_csv(ctx.file("filtered.csv"), est.record, cols);
  write_json(ctx.file("filter.json"), j);
  ctx.result.summary = j;
}

}  // namespace

CommandResult run_command(const RunManifest& manifest, const CommandOptions& options) {
  manifest.config.validate();
  Context ctx{manifest, options, fs::path(manifest.output_dir), {}};
  fs::create_directories(ctx.dir);
  for (const auto& w : manifest.config.warnings()) {
    ctx.note("warning: " + w);
  }
  write_json(ctx.file("manifest.json"), manifest_to_json(manifest));
  write_text(ctx.file("config.txt"), serialize_config(manifest.config));
  ctx.note(to_string(manifest.command) + " -> " + ctx.dir.string());
  switch (manifest.command) {
    case Command::trajectory:
      run_trajectory(ctx);
      break;
    case Command::unconditional:
      run_unconditional_command(ctx);
      break;
    case Command::ensemble:
      run_ensemble_command(ctx);
      break;
    case Command::sweep:
      run_sweep_command(ctx);
      break;
    case Command::jumps:
      run_jumps_command(ctx);
      break;
    case Command::filter:
      run_filter_command(ctx);
      break;
  }
  return std::move(ctx.result);
}

CommandResult run_figure(std::string_view name, const fs::path& out_dir,
                         std::optional<std::uint64_t> seed, const std::string& created_at,
                         const CommandOptions& options) {
  const Preset preset = make_preset(name);
  CommandResult out;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : preset.steps) {
    RunManifest m;
    m.command = step.command;
    m.config = step.config;
    if (seed) {
      m.config.seed = *seed;
    }
    m.output_dir = (out_dir / step.subdir).string();
    m.created_at = created_at;
    m.tool_version = std::string(kToolVersion);
    m.preset = preset.name;
    CommandResult r = run_command(m, options);
    out.files.insert(out.files.end(), r.files.begin(), r.files.end());
    steps.push_back({{"subdir", step.subdir}, {"command", to_string(step.command)}});
  }
  out.summary = {{"preset", preset.name}, {"description", preset.description}, {"steps", steps}};
  write_json(out_dir / "figure.json", out.summary);
  out.files.push_back(out_dir / "figure.json");
  return out;
}

}  // namespace qnd
