#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "qnd/sme.hpp"

namespace qnd {

/// Environment variable holding the worker count.
inline constexpr const char* kWorkersEnv = "QNDSIM_WORKERS";

/// Worker count from QNDSIM_WORKERS, else the hardware concurrency (>= 1).
int worker_count();

/// Computes produce(i) for i in [0, n) on up to `workers` threads and hands the
/// results to consume(i, value) strictly in index order, from the calling
/// thread. Output is therefore independent of the worker count. The first
/// exception (in index order) is rethrown after the batch that raised it.
template <class T>
void parallel_ordered(std::size_t n, int workers, const std::function<T(std::size_t)>& produce,
                      const std::function<void(std::size_t, T&&)>& consume) {
  workers = std::max(1, workers);
  const std::size_t batch = static_cast<std::size_t>(workers) * 4;
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t stop = std::min(n, start + batch);
    std::vector<std::optional<T>> results(stop - start);
    std::vector<std::exception_ptr> errors(stop - start);
    std::atomic<std::size_t> next{start};
    auto work = [&] {
      for (std::size_t i = next++; i < stop; i = next++) {
        try {
          results[i - start].emplace(produce(i));
        } catch (...) {
          errors[i - start] = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back(work);
      }
    }
    for (std::size_t i = start; i < stop; ++i) {
      if (errors[i - start]) {
        std::rethrow_exception(errors[i - start]);
      }
      consume(i, std::move(*results[i - start]));
    }
  }
}

/// Configuration of trajectory `index` of an ensemble: seed replaced by
/// derive_seed(base.seed, base.k, index).
SimulationConfig trajectory_config(const SimulationConfig& base, std::size_t index);

/// Runs n generator trajectories of `base` and visits each record in index order.
void run_ensemble(const SimulationConfig& base, std::size_t n,
                  const std::function<void(std::size_t, GeneratorResult&&)>& visit,
                  int workers = 0, const RunOptions& options = {});

}  // namespace qnd
