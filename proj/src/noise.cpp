#include "qnd/noise.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace qnd {

std::uint64_t derive_seed(std::uint64_t base_seed, double k, std::uint64_t index) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(k));
  return mix64(h ^ mix64(index + 0x51ed27ULL));
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * 0xd1342543de82ef95ULL))) {}

double NoiseStream::uniform(std::uint64_t counter, std::uint64_t lane) const {
  const std::uint64_t bits = mix64(key_ ^ mix64(counter * 2 + lane));
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::gaussian(std::uint64_t counter) const {
  const double u1 = uniform(counter, 0);
  const double u2 = uniform(counter, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qnd
