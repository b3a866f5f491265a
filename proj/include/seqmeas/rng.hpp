#pragma once

#include <cstdint>
#include <random>

namespace seqmeas {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Per-trajectory seed derivation, part of the public reproducibility
// contract: seed(i) = splitmix64 state advanced twice from
// master ^ golden-ratio-mix(i+1). Identical across runs and thread counts.
inline std::uint64_t trajectory_seed(std::uint64_t master_seed,
                                     std::uint64_t index) {
  std::uint64_t state = master_seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
  (void)splitmix64(state);
  return splitmix64(state);
}

/// Uniform double in [0, 1) with fully specified bit usage (top 53 bits),
/// avoiding implementation-defined std:: distribution behavior.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace seqmeas
