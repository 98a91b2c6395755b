#pragma once

#include <cmath>
#include <cstdint>

namespace mmfg {

// Counter-based noise source: every normal draw is a pure function of
// (seed, path, player, step, index), so results do not depend on scheduling
// or on the order in which paths are simulated.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct NoiseStream {
  uint64_t key;

  NoiseStream(uint64_t seed, uint64_t path, uint64_t player) {
    uint64_t h = splitmix64(seed ^ 0x8000000000000000ULL);
    h = splitmix64(h ^ (path * 0xd1342543de82ef95ULL));
    h = splitmix64(h ^ (player * 0xaf251af3b0f025b5ULL));
    key = h;
  }

  double uniform(uint64_t counter) const {
    const uint64_t v = splitmix64(key ^ (counter * 0x2545f4914f6cdd1dULL));
    return ((v >> 11) + 0.5) * 0x1.0p-53;  // in (0, 1)
  }

  /// Standard normal draw `index` of time step `step` (Box-Muller, the
  /// cosine branch only; each draw burns two uniforms).
  double normal(uint64_t step, uint64_t index) const {
    const uint64_t base = 2 * (step * 0x100000001b3ULL + index);
    const double u1 = uniform(base);
    const double u2 = uniform(base + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

}  // namespace mmfg
