#pragma once

#include <cstdint>

namespace xhv {

// Counter-based per-particle random stream. Each particle gets an
// independent stream derived from (seed, particle index), so results do
// not depend on how particles are distributed over workers.
class Prng {
 public:
  Prng(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(mix(seed + 0x9E3779B97F4A7C15ull) ^ mix(stream * 0xBF58476D1CE4E5B9ull + 1));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace xhv
