#pragma once

#include <random>

namespace ipdb {

/// Random source for all samplers. The engine's own draws are derived from
/// raw 64-bit outputs so that a fixed seed reproduces the same stream on
/// every platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_uniform(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p)
{
    return unit_uniform(rng) < p;
}

} // namespace ipdb
