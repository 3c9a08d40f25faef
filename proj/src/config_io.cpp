#include "qnd/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qnd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

JumpDirection parse_direction(std::string_view key, std::string_view s) {
  if (s == "up") {
    return JumpDirection::up;
  }
  if (s == "down") {
    return JumpDirection::down;
  }
  throw ConfigError(std::string(key), "jump direction must be up or down, got '" +
                                          std::string(s) + "'");
}

struct Pending {
  bool dt = false;
  bool sample_every = false;
};

void apply_key(SimulationConfig& cfg, Pending& seen, std::string_view key,
               std::string_view value) {
  if (key == "omega") {
    cfg.model.omega = parse_double(key, value);
  } else if (key == "g") {
    cfg.model.g = parse_double(key, value);
  } else if (key == "n_max") {
    cfg.model.n_max = parse_int<int>(key, value);
  } else if (key == "k") {
    cfg.k = parse_double(key, value);
  } else if (key == "eta") {
    cfg.eta = parse_double(key, value);
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "n_T") {
    cfg.n_T = parse_double(key, value);
  } else if (key == "n_bar") {
    cfg.n_bar = parse_double(key, value);
  } else if (key == "dt") {
    cfg.dt = parse_double(key, value);
    seen.dt = true;
  } else if (key == "t_final") {
    cfg.t_final = parse_double(key, value);
  } else if (key == "sample_every") {
    cfg.sample_every = parse_int<int>(key, value);
    seen.sample_every = true;
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "jump_schedule") {
    cfg.jump_schedule.clear();
    if (!value.empty()) {
      for (auto item : split(value, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
          throw ConfigError(std::string(key), "entries must look like <time>:<up|down>");
        }
        cfg.jump_schedule.push_back({parse_double(key, parts[0]), parse_direction(key, parts[1])});
      }
    }
  } else if (key == "n_trajectories") {
    cfg.n_trajectories = parse_int<int>(key, value);
  } else if (key == "k_values") {
    cfg.k_values.clear();
    if (!value.empty()) {
      for (auto item : split(value, ',')) {
        cfg.k_values.push_back(parse_double(key, item));
      }
    }
  } else if (key == "qubit") {
    try {
      cfg.qubit = parse_qubit(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(key), e.what());
    }
  } else if (key == "fock_n") {
    if (value.empty() || value == "none") {
      cfg.fock_n.reset();
    } else {
      cfg.fock_n = parse_int<int>(key, value);
    }
  } else if (key == "bath") {
    if (value == "averaged") {
      cfg.bath = BathRealization::averaged;
    } else if (value == "markov") {
      cfg.bath = BathRealization::markov;
    } else {
      throw ConfigError(std::string(key), "must be averaged or markov");
    }
  } else if (key == "scheme") {
    if (value == "kraus") {
      cfg.scheme = Scheme::kraus;
    } else if (value == "euler") {
      cfg.scheme = Scheme::euler;
    } else {
      throw ConfigError(std::string(key), "must be kraus or euler");
    }
  } else if (key == "orphan_limit") {
    cfg.orphan_limit = parse_double(key, value);
  } else {
    throw ConfigError(std::string(key), "unknown key");
  }
}

void finish(SimulationConfig& cfg, const Pending& seen) {
  if (!seen.dt) {
    cfg.dt = default_dt(cfg.k, cfg.model.g > 0.0 ? cfg.model.g : 1.0);
  }
  if (!seen.sample_every && cfg.dt > 0.0) {
    cfg.sample_every = default_sample_every(cfg.dt);
  }
  cfg.validate();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string to_string(JumpDirection d) { return d == JumpDirection::up ? "up" : "down"; }

std::string format_jump_schedule(const std::vector<JumpEvent>& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += format_double(schedule[i].time) + ":" + to_string(schedule[i].direction);
  }
  return out;
}

SimulationConfig parse_config(std::string_view text) {
  SimulationConfig cfg;
  Pending seen;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected <key> = <value>");
    }
    apply_key(cfg, seen, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  finish(cfg, seen);
  return cfg;
}

SimulationConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open config file " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const SimulationConfig& cfg) {
  std::ostringstream out;
  out << "omega = " << format_double(cfg.model.omega) << "\n";
  out << "g = " << format_double(cfg.model.g) << "\n";
  out << "n_max = " << cfg.model.n_max << "\n";
  out << "k = " << format_double(cfg.k) << "\n";
  out << "eta = " << format_double(cfg.eta) << "\n";
  out << "gamma = " << format_double(cfg.gamma) << "\n";
  out << "n_T = " << format_double(cfg.n_T) << "\n";
  out << "n_bar = " << format_double(cfg.n_bar) << "\n";
  if (cfg.fock_n) {
    out << "fock_n = " << *cfg.fock_n << "\n";
  }
  out << "qubit = " << (cfg.qubit == Qubit::e ? "e" : "g") << "\n";
  out << "dt = " << format_double(cfg.dt) << "\n";
  out << "t_final = " << format_double(cfg.t_final) << "\n";
  out << "sample_every = " << cfg.sample_every << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "jump_schedule = " << format_jump_schedule(cfg.jump_schedule) << "\n";
  out << "bath = " << (cfg.bath == BathRealization::markov ? "markov" : "averaged") << "\n";
  out << "scheme = " << (cfg.scheme == Scheme::euler ? "euler" : "kraus") << "\n";
  out << "orphan_limit = " << format_double(cfg.orphan_limit) << "\n";
  out << "n_trajectories = " << cfg.n_trajectories << "\n";
  out << "k_values = ";
  for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
    out << (i ? ", " : "") << format_double(cfg.k_values[i]);
  }
  out << "\n";
  return out.str();
}

std::string config_hash(const SimulationConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_config(cfg))));
  return buf;
}

nlohmann::json config_to_json(const SimulationConfig& cfg) {
  nlohmann::json j;
  j["omega"] = cfg.model.omega;
  j["g"] = cfg.model.g;
  j["n_max"] = cfg.model.n_max;
  j["k"] = cfg.k;
  j["eta"] = cfg.eta;
  j["gamma"] = cfg.gamma;
  j["n_T"] = cfg.n_T;
  j["n_bar"] = cfg.n_bar;
  j["fock_n"] = cfg.fock_n ? nlohmann::json(*cfg.fock_n) : nlohmann::json(nullptr);
  j["qubit"] = cfg.qubit == Qubit::e ? "e" : "g";
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["sample_every"] = cfg.sample_every;
  j["seed"] = cfg.seed;
  auto schedule = nlohmann::json::array();
  for (const auto& ev : cfg.jump_schedule) {
    schedule.push_back({{"time", ev.time}, {"direction", to_string(ev.direction)}});
  }
  j["jump_schedule"] = schedule;
  j["bath"] = cfg.bath == BathRealization::markov ? "markov" : "averaged";
  j["scheme"] = cfg.scheme == Scheme::euler ? "euler" : "kraus";
  j["orphan_limit"] = cfg.orphan_limit;
  j["n_trajectories"] = cfg.n_trajectories;
  j["k_values"] = cfg.k_values;
  return j;
}

SimulationConfig config_from_json(const nlohmann::json& j) {
  SimulationConfig cfg;
  Pending seen;
  for (const auto& [key, value] : j.items()) {
    if (key == "jump_schedule") {
      cfg.jump_schedule.clear();
      for (const auto& ev : value) {
        cfg.jump_schedule.push_back(
            {ev.at("time").get<double>(),
             parse_direction(key, ev.at("direction").get<std::string>())});
      }
    } else if (key == "k_values") {
      cfg.k_values = value.get<std::vector<double>>();
    } else if (key == "fock_n") {
      if (value.is_null()) {
        cfg.fock_n.reset();
      } else {
        cfg.fock_n = value.get<int>();
      }
    } else if (value.is_string()) {
      apply_key(cfg, seen, key, value.get<std::string>());
    } else if (value.is_number_float()) {
      apply_key(cfg, seen, key, format_double(value.get<double>()));
    } else {
      apply_key(cfg, seen, key, value.dump());
    }
  }
  finish(cfg, seen);
  return cfg;
}

std::string to_string(Command c) {
  switch (c) {
    case Command::trajectory:
      return "trajectory";
    case Command::unconditional:
      return "unconditional";
    case Command::ensemble:
      return "ensemble";
    case Command::sweep:
      return "sweep";
    case Command::jumps:
      return "jumps";
    case Command::filter:
      return "filter";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::trajectory, Command::unconditional, Command::ensemble,
                    Command::sweep, Command::jumps, Command::filter}) {
    if (to_string(c) == name) {
      return c;
    }
  }
  throw std::invalid_argument("unknown command '" + std::string(name) + "'");
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"command", to_string(m.command)},
          {"config", config_to_json(m.config)},
          {"output_dir", m.output_dir},
          {"created_at", m.created_at},
          {"tool_version", m.tool_version},
          {"preset", m.preset},
          {"record_file", m.record_file},
          {"truth_file", m.truth_file}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = parse_command(j.at("command").get<std::string>());
  m.config = config_from_json(j.at("config"));
  m.output_dir = j.at("output_dir").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.preset = j.value("preset", "");
  m.record_file = j.value("record_file", "");
  m.truth_file = j.value("truth_file", "");
  return m;
}

}  // namespace qnd
