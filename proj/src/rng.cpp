#include "vrpca/rng.hpp"

#include <cmath>
#include <numbers>

#include "vrpca/errors.hpp"

namespace vrpca {

std::uint64_t CounterRng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ContractViolation("uniform_index: empty range");
  // 128-bit product; reject the low sliver that would bias small residues.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::gaussian() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vrpca
