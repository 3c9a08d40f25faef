#include "qnd/output.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qnd/config_io.hpp"

namespace qnd {

namespace {

std::string format_with(const char* fmt, double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, fmt, x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + file.string());
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_cell(const std::string& cell, const std::string& column, const std::string& where) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw SchemaError(column, where + ": column '" + column + "' holds non-numeric value '" +
                                  cell + "'");
  }
  return x;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + file.string());
  }
  Table t;
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("", file.string() + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw SchemaError("", file.string() + ": row " + std::to_string(t.rows.size() + 1) +
                                " has " + std::to_string(cells.size()) + " cells, header has " +
                                std::to_string(t.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = parse_cell(cells[c], t.header[c], file.string());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void expect_column(const Table& t, std::size_t index, const std::string& name,
                   const std::filesystem::path& file) {
  if (index >= t.header.size()) {
    throw SchemaError(name, file.string() + ": missing column '" + name + "'");
  }
  if (t.header[index] != name) {
    throw SchemaError(name, file.string() + ": expected column '" + name + "' at position " +
                                std::to_string(index) + ", found '" + t.header[index] + "'");
  }
}

const char* const kTrajectoryColumns[] = {"t", "dY_bin", "sigma_ee", "purity", "mean_n",
                                          "leakage"};

}  // namespace

std::string format_value(double x) { return format_with("%.9g", x); }

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          std::span<const ExtraColumn> extra) {
  const std::size_t n_m = record.size() > 0 ? record.p_m.front().size() : 0;
  for (const auto& col : extra) {
    if (col.values.size() != record.size()) {
      throw std::invalid_argument("extra column '" + col.name + "' has the wrong length");
    }
  }
  std::string text = "t,dY_bin,sigma_ee,purity,mean_n,leakage";
  for (std::size_t m = 0; m < n_m; ++m) {
    text += ",p_" + std::to_string(m);
  }
  for (const auto& col : extra) {
    text += "," + col.name;
  }
  text += "\n";
  for (std::size_t i = 0; i < record.size(); ++i) {
    text += format_value(record.times[i]);
    for (double v : {record.dY[i], record.sigma_ee[i], record.purity[i], record.mean_n[i],
                     record.leakage[i]}) {
      text += ',';
      text += format_value(v);
    }
    for (double p : record.p_m[i]) {
      text += ',';
      text += format_value(p);
    }
    for (const auto& col : extra) {
      text += ',';
      text += format_value(col.values[i]);
    }
    text += '\n';
  }
  out << text;
}

void write_trajectory_csv(const std::filesystem::path& file, const TrajectoryRecord& record,
                          std::span<const ExtraColumn> extra) {
  auto out = open_out(file);
  write_trajectory_csv(out, record, extra);
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& file) {
  const Table t = read_table(file);
  for (std::size_t c = 0; c < std::size(kTrajectoryColumns); ++c) {
    expect_column(t, c, kTrajectoryColumns[c], file);
  }
  std::size_t n_m = 0;
  while (6 + n_m < t.header.size() && t.header[6 + n_m] == "p_" + std::to_string(n_m)) {
    ++n_m;
  }
  if (n_m == 0) {
    throw SchemaError("p_0", file.string() + ": missing column 'p_0'");
  }
  TrajectoryRecord r;
  for (const auto& row : t.rows) {
    r.times.push_back(row[0]);
    r.dY.push_back(row[1]);
    r.sigma_ee.push_back(row[2]);
    r.purity.push_back(row[3]);
    r.mean_n.push_back(row[4]);
    r.leakage.push_back(row[5]);
    r.p_m.emplace_back(row.begin() + 6, row.begin() + 6 + static_cast<long>(n_m));
  }
  return r;
}

nlohmann::json trajectory_sidecar(const SimulationConfig& cfg, const TrajectoryRecord& record,
                                  double runtime_seconds) {
  double leak = 0.0;
  for (double l : record.leakage) {
    leak = std::max(leak, l);
  }
  return {{"config", config_to_json(cfg)},
          {"seed", cfg.seed},
          {"config_hash", config_hash(cfg)},
          {"leakage_max", leak},
          {"runtime_seconds", runtime_seconds},
          {"tool_version", std::string(kToolVersion)}};
}

void write_record_csv(const std::filesystem::path& file, const MeasurementRecord& record) {
  auto out = open_out(file);
  std::string text = "t,dY\n";
  for (std::size_t i = 0; i < record.dY.size(); ++i) {
    text += format_with("%.17g", static_cast<double>(i) * record.dt);
    text += ',';
    text += format_with("%.17g", record.dY[i]);
    text += '\n';
  }
  out << text;
}

MeasurementRecord read_record_csv(const std::filesystem::path& file,
                                  std::optional<long> expected_rows) {
  const Table t = read_table(file);
  expect_column(t, 0, "t", file);
  expect_column(t, 1, "dY", file);
  if (t.header.size() != 2) {
    throw SchemaError(t.header[2], file.string() + ": unexpected column '" + t.header[2] + "'");
  }
  const long found = static_cast<long>(t.rows.size());
  if (expected_rows && found != *expected_rows) {
    throw SchemaError("", file.string() + ": expected " + std::to_string(*expected_rows) +
                              " rows, found " + std::to_string(found));
  }
  if (found < 2) {
    throw SchemaError("t", file.string() + ": need at least two rows to infer dt");
  }
  MeasurementRecord r;
  r.dt = t.rows[1][0] - t.rows[0][0];
  if (!(r.dt > 0.0)) {
    throw SchemaError("t", file.string() + ": column 't' is not increasing");
  }
  r.dY.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    r.dY.push_back(row[1]);
  }
  return r;
}

void write_ensemble_csv(const std::filesystem::path& file, const EnsembleSummary& summary) {
  auto out = open_out(file);
  std::vector<std::pair<std::string, const SeriesStats*>> cols{
      {"dY_bin", &summary.dY},   {"sigma_ee", &summary.sigma_ee}, {"purity", &summary.purity},
      {"mean_n", &summary.mean_n}, {"leakage", &summary.leakage}};
  for (std::size_t m = 0; m < summary.p_m.size(); ++m) {
    cols.emplace_back("p_" + std::to_string(m), &summary.p_m[m]);
  }
  std::string text = "t";
  for (const auto& [name, _] : cols) {
    text += "," + name + "_mean," + name + "_std";
  }
  text += '\n';
  for (std::size_t i = 0; i < summary.times.size(); ++i) {
    text += format_value(summary.times[i]);
    for (const auto& [_, s] : cols) {
      text += ',';
      text += format_value(s->mean[i]);
      text += ',';
      text += format_value(s->std[i]);
    }
    text += '\n';
  }
  out << text;
}

nlohmann::json fit_to_json(const PurityFit& fit) {
  return {{"tau", fit.tau},
          {"p0", fit.p0},
          {"residual", fit.residual},
          {"n_points_used", fit.n_points_used}};
}

nlohmann::json sweep_to_json(std::span<const SweepEntry> entries) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j{{"k", e.k}, {"n_trajectories", e.n_trajectories}, {"seeds", e.seeds}};
    if (e.fit) {
      j["tau"] = e.fit->tau;
      j["p0"] = e.fit->p0;
      j["residual"] = e.fit->residual;
    } else {
      j["tau"] = nullptr;
      j["p0"] = nullptr;
      j["residual"] = nullptr;
      j["error"] = e.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::json read_json(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + file.string());
  }
  return nlohmann::json::parse(in);
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  auto out = open_out(file);
  out << text;
}

}  // namespace qnd
