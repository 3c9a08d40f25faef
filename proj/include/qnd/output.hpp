#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnd/analysis.hpp"
#include "qnd/sme.hpp"

namespace qnd {

/// A CSV file whose header or rows do not match what the reader expects.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string column, const std::string& message)
      : std::runtime_error(message), column_(std::move(column)) {}
  [[nodiscard]] const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// 9 significant digits, as used in all plot-ready CSV files.
std::string format_value(double x);

struct ExtraColumn {
  std::string name;
  std::vector<double> values;
};

/// Columns t, dY_bin, sigma_ee, purity, mean_n, leakage, p_0..p_{n_max},
/// then any extra columns.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          std::span<const ExtraColumn> extra = {});
void write_trajectory_csv(const std::filesystem::path& file, const TrajectoryRecord& record,
                          std::span<const ExtraColumn> extra = {});

/// Reads a trajectory CSV back (extra columns ignored).
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& file);

/// Config, seed, maximum leakage and wall-clock runtime of one run.
nlohmann::json trajectory_sidecar(const SimulationConfig& cfg, const TrajectoryRecord& record,
                                  double runtime_seconds);

/// Full-resolution record, one row per step: t (step start), dY. Written with
/// 17 significant digits so a filter sees exactly the generator's increments.
void write_record_csv(const std::filesystem::path& file, const MeasurementRecord& record);

/// Reads a record CSV. When expected_rows is given a different row count is
/// an error naming both counts. dt is taken from the t column.
MeasurementRecord read_record_csv(const std::filesystem::path& file,
                                  std::optional<long> expected_rows = std::nullopt);

/// Mean/std pairs for every TrajectoryRecord column.
void write_ensemble_csv(const std::filesystem::path& file, const EnsembleSummary& summary);

nlohmann::json fit_to_json(const PurityFit& fit);
/// One object per k: {k, tau, p0, residual, n_trajectories, seeds[, error]}.
nlohmann::json sweep_to_json(std::span<const SweepEntry> entries);

nlohmann::json read_json(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace qnd
