// SPDX-License-Identifier: Apache-2.0
//
// pilotforge - coordinated uplink pilot design for multicell massive MIMO
// Copyright (C) 2026 pilotforge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef pilotforge_rng_H
#define pilotforge_rng_H

#include "common.hpp"

#include <cmath>
#include <cstdint>

namespace pilotforge
{

// Fixed stream ids so topology, shadowing and correlation draws stay
// independent of each other and of harness-level consumers.
namespace stream
{
constexpr std::uint64_t topology = 0x11;
constexpr std::uint64_t shadowing = 0x22;
constexpr std::uint64_t correlation = 0x33;
constexpr std::uint64_t baseline = 0x44;
constexpr std::uint64_t monte_carlo = 0x55;
constexpr std::uint64_t fuzz = 0x66;
} // namespace stream

// Counter-based generator (SplitMix64 family): the n-th output is a pure
// function of (seed, stream_id, n), so streams never alias and instances
// are reproducible bitwise regardless of call interleaving elsewhere.
class StreamRng
{
  public:
    StreamRng(std::uint64_t seed, std::uint64_t stream_id)
    {
        key_ = mix(mix(seed) ^ mix(stream_id * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t next_u64()
    {
        return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
    }

    // Uniform on [0,1)
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo,hi)
    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller (second draw cached)
    double normal()
    {
        if (have_spare_)
        {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0,1], keeps log() finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly-symmetric complex normal, unit variance: E|z|^2 = 1
    cx cnormal()
    {
        double re = normal(), im = normal();
        return cx(re * 0.70710678118654752440, im * 0.70710678118654752440);
    }

    // Integer in [0, n)
    std::uint64_t below(std::uint64_t n)
    {
        return next_u64() % n; // modulo bias irrelevant at simulation scales
    }

  private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable per-trial seed derivation for parallel experiment workers.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial)
{
    StreamRng r(master_seed, 0xD127 + trial);
    return r.next_u64();
}

} // namespace pilotforge

#endif
