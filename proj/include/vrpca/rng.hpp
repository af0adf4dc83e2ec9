#pragma once

#include <cstdint>

namespace vrpca {

/// Counter-based generator: the i-th output is a pure function of (key, i), so a
/// stream can be split into independent substreams and replayed exactly.
/// Gaussian draws use Box-Muller on our own uniforms, which keeps results
/// identical across standard-library implementations.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() { return mix(key_ + mix(counter_++)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_index(std::uint64_t n);

  double gaussian();

  /// Independent generator for a numbered substream.
  CounterRng substream(std::uint64_t id) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(id + 0x9e3779b97f4a7c15ULL));
    return child;
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vrpca
