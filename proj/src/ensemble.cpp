#include "qnd/ensemble.hpp"

#include <cstdlib>
#include <string>

#include "qnd/noise.hpp"

namespace qnd {

int worker_count() {
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
    try {
      const int n = std::stoi(env);
      if (n >= 1) {
        return n;
      }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string(kWorkersEnv) + " must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationConfig trajectory_config(const SimulationConfig& base, std::size_t index) {
  SimulationConfig cfg = base;
  cfg.seed = derive_seed(base.seed, base.k, index);
  return cfg;
}

void run_ensemble(const SimulationConfig& base, std::size_t n,
                  const std::function<void(std::size_t, GeneratorResult&&)>& visit, int workers,
                  const RunOptions& options) {
  base.validate();
  parallel_ordered<GeneratorResult>(
      n, workers > 0 ? workers : worker_count(),
      [&](std::size_t i) { return run_generator(trajectory_config(base, i), options); }, visit);
}

}  // namespace qnd
