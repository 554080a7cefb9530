#pragma once

#include <cstdint>
#include <random>

namespace qhbm {

// Project-wide RNG: a seedable Mersenne Twister (64-bit). All stochastic
// code in this library draws from this generator so that experiments are
// reproducible bit-for-bit from a seed.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits of one 64-bit draw
// (53-bit mantissa division). Exactly one generator call per value.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double on [lo, hi).
inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace qhbm
