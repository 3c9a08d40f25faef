#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "qnd/output.hpp"

#ifndef SIMULATE_EXE
#error "SIMULATE_EXE must point at the simulate binary"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "qndsim_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int simulate(const std::string& args, const std::string& log_name = "log.txt") {
  const std::string cmd = std::string("\"") + SIMULATE_EXE + "\" " + args + " > \"" +
                          (root() / log_name).string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path file = root() / name;
  std::ofstream(file) << text;
  return file;
}

const char* kSmall =
    "k = 0.5\n"
    "n_max = 12\n"
    "n_bar = 0.3\n"
    "t_final = 4\n"
    "seed = 21\n";

}  // namespace

TEST_CASE("trajectory run writes outputs and a manifest that reproduces them") {
  const auto cfg = write_config("small.cfg", kSmall);
  const fs::path out = root() / "traj";
  REQUIRE(simulate("trajectory --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"") ==
          0);
  for (const char* f : {"trajectory.csv", "trajectory.json", "record.csv", "record.json",
                        "manifest.json", "config.txt"}) {
    CHECK(fs::exists(out / f));
  }
  const auto sidecar = qnd::read_json(out / "trajectory.json");
  CHECK(sidecar.at("seed").get<std::uint64_t>() == 21);
  CHECK(sidecar.contains("leakage_max"));
  CHECK(sidecar.contains("config_hash"));

  // Re-run from the manifest into a second directory.
  auto manifest = qnd::read_json(out / "manifest.json");
  const fs::path again = root() / "traj_again";
  manifest["output_dir"] = again.string();
  qnd::write_json(root() / "again.json", manifest);
  REQUIRE(simulate("trajectory --manifest \"" + (root() / "again.json").string() +
                   "\" --workers 2") == 0);
  CHECK(slurp(out / "trajectory.csv") == slurp(again / "trajectory.csv"));
  CHECK(slurp(out / "record.csv") == slurp(again / "record.csv"));
}

TEST_CASE("filtering a generator's own record tracks its state") {
  const auto cfg = write_config("filt.cfg", kSmall);
  const fs::path gen = root() / "gen";
  REQUIRE(simulate("trajectory --config \"" + cfg.string() + "\" --out \"" + gen.string() + "\"") ==
          0);
  const fs::path filt = root() / "filt";
  REQUIRE(simulate("filter --config \"" + cfg.string() + "\" --record \"" +
                   (gen / "record.csv").string() + "\" --out \"" + filt.string() + "\"") == 0);
  const std::string text = slurp(filt / "filtered.csv");
  const auto header = text.substr(0, text.find('\n'));
  REQUIRE(header.find("trace_distance") != std::string::npos);

  // The filter knows the same initial state, so it reproduces the run exactly.
  const auto mine = qnd::read_trajectory_csv(filt / "filtered.csv");
  const auto truth = qnd::read_trajectory_csv(gen / "trajectory.csv");
  REQUIRE(mine.size() == truth.size());
  for (std::size_t i = 0; i < mine.size(); ++i) {
    CHECK(std::abs(mine.sigma_ee[i] - truth.sigma_ee[i]) < 0.05);
  }
}

TEST_CASE("filter refuses a record from a different k") {
  const auto gen_cfg = write_config("gen_k.cfg", kSmall);
  const fs::path gen = root() / "gen_k";
  REQUIRE(simulate("trajectory --config \"" + gen_cfg.string() + "\" --out \"" + gen.string() +
                   "\"") == 0);
  const auto other = write_config("other_k.cfg", "k = 0.7\nn_max = 12\nn_bar = 0.3\nt_final = 4\nseed = 21\n");
  const int code = simulate("filter --config \"" + other.string() + "\" --record \"" +
                                (gen / "record.csv").string() + "\" --out \"" +
                                (root() / "bad").string() + "\"",
                            "refuse.txt");
  CHECK(code != 0);
  CHECK(slurp(root() / "refuse.txt").find("refusing to filter") != std::string::npos);
}

TEST_CASE("bad invocations fail with a message") {
  CHECK(simulate("figure fig99 --out \"" + (root() / "nope").string() + "\"", "preset.txt") != 0);
  CHECK_FALSE(slurp(root() / "preset.txt").empty());

  const auto bad = write_config("bad.cfg", "k = -1\n");
  CHECK(simulate("trajectory --config \"" + bad.string() + "\" --out \"" +
                     (root() / "nope2").string() + "\"",
                 "badk.txt") != 0);
  CHECK(slurp(root() / "badk.txt").find("k") != std::string::npos);

  const auto cfg = write_config("both.cfg", kSmall);
  CHECK(simulate("trajectory --config \"" + cfg.string() + "\" --preset fig2a --out \"" +
                     (root() / "nope3").string() + "\"",
                 "both.txt") != 0);
}

TEST_CASE("unconditional and ensemble commands") {
  const auto cfg = write_config("ens.cfg", std::string(kSmall) + "n_trajectories = 4\n");
  const fs::path unc = root() / "unc";
  REQUIRE(simulate("unconditional --config \"" + cfg.string() + "\" --out \"" + unc.string() +
                   "\"") == 0);
  CHECK(fs::exists(unc / "unconditional.csv"));
  const fs::path ens = root() / "ens";
  REQUIRE(simulate("ensemble --config \"" + cfg.string() + "\" --out \"" + ens.string() + "\"") ==
          0);
  CHECK(fs::exists(ens / "ensemble.csv"));
  const auto summary = qnd::read_json(ens / "ensemble.json");
  CHECK(summary.at("n_trajectories").get<int>() == 4);
}
