#pragma once

#include <cstdint>

namespace qnd {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable seed for trajectory `index` of a run at measurement strength k.
/// Depends only on (base_seed, k, index), never on list positions or
/// scheduling, so sweeps are reproducible and order-independent.
std::uint64_t derive_seed(std::uint64_t base_seed, double k, std::uint64_t index);

/// Counter-based random source: the n-th draw of a stream is a pure function
/// of (seed, stream, n). Trajectories never share mutable generator state.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform deviate in (0, 1).
  [[nodiscard]] double uniform(std::uint64_t counter, std::uint64_t lane = 0) const;
  /// Standard normal deviate (Box-Muller, cosine branch only).
  [[nodiscard]] double gaussian(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Stream ids used by the integrators.
inline constexpr std::uint64_t kMeasurementStream = 1;
inline constexpr std::uint64_t kBathStream = 2;

}  // namespace qnd
