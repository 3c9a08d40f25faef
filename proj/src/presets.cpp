#include "qnd/presets.hpp"

#include <stdexcept>

namespace qnd {

namespace {

// Thermal n_bar = 3 oscillator with the qubit excited, no bath.
SimulationConfig base_config(double k, double t_final) {
  SimulationConfig cfg;
  cfg.k = k;
  cfg.t_final = t_final;
  cfg.n_bar = 3.0;
  // thermal(3) puts too much weight on the orphan state at the default cutoff
  cfg.model.n_max = 50;
  cfg.qubit = Qubit::e;
  cfg.seed = kPresetSeed;
  cfg.dt = default_dt(k, cfg.model.g);
  cfg.sample_every = default_sample_every(cfg.dt);
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig2a", "fig2c", "fig2e", "fig3", "fig4", "fig5"};
}

Preset make_preset(std::string_view name) {
  Preset p;
  p.name = std::string(name);
  if (name == "fig1") {
    p.description = "collapse and revival without probing, plus one conditioned trajectory";
    p.steps.push_back({"unconditional", Command::unconditional, base_config(0.0, 50.0)});
    p.steps.push_back({"trajectory", Command::trajectory, base_config(0.1, 50.0)});
  } else if (name == "fig2a") {
    p.description = "weak probing, k = 0.1 g";
    p.steps.push_back({"trajectory", Command::trajectory, base_config(0.1, 50.0)});
  } else if (name == "fig2c") {
    p.description = "strong probing, k = g";
    p.steps.push_back({"trajectory", Command::trajectory, base_config(1.0, 50.0)});
  } else if (name == "fig2e") {
    p.description = "very strong probing, k = 10 g";
    p.steps.push_back({"trajectory", Command::trajectory, base_config(10.0, 50.0)});
  } else if (name == "fig3") {
    p.description = "mean purity of 200 trajectories at k = 0.1 g and tau over k";
    SimulationConfig ens = base_config(0.1, 100.0);
    ens.n_trajectories = 200;
    SimulationConfig sweep = ens;
    sweep.k_values = {0.1, 1.0, 10.0};
    p.steps.push_back({"ensemble", Command::ensemble, ens});
    p.steps.push_back({"sweep", Command::sweep, sweep});
  } else if (name == "fig4") {
    p.description = "single heating event at gt = 25, informed and filtered estimates";
    SimulationConfig cfg = base_config(0.1, 100.0);
    cfg.gamma = 1e-3;
    cfg.n_T = 3.0;
    cfg.jump_schedule = {{25.0, JumpDirection::up}};
    p.steps.push_back({"jumps", Command::jumps, cfg});
  } else if (name == "fig5") {
    p.description = "bath-driven jumps at k = g, informed and filtered estimates";
    SimulationConfig cfg = base_config(1.0, 300.0);
    cfg.gamma = 1e-3;
    cfg.n_T = 3.0;
    cfg.bath = BathRealization::markov;
    p.steps.push_back({"jumps", Command::jumps, cfg});
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) +
                                "' (expected fig1, fig2a, fig2c, fig2e, fig3, fig4 or fig5)");
  }
  return p;
}

}  // namespace qnd
