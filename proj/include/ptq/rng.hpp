#pragma once

#include <cmath>
#include <cstdint>

namespace ptq {

// Deterministic, platform-independent pseudo-random stream (splitmix64).
// Streams derived from the same (master seed, index) pair produce identical
// draws on any platform and thread schedule; std:: distributions are avoided
// on purpose since their output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Stream for trajectory `index` under `master`. Mixes both words through
  // the output function so neighbouring indices are decorrelated.
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    return RngStream(mix(mix(master) ^ mix(index * 0x9E3779B97F4A7C15ULL + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace ptq
