// SPDX-License-Identifier: Apache-2.0
//
// locache  Location-dependent coded caching with multi-antenna beamforming
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

#ifndef LOCACHE_RNG_HPP
#define LOCACHE_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace locache {

inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Purpose tags keep the per-(seed, drop) streams of different consumers
// decorrelated without any shared mutable state.
enum class StreamTag : std::uint64_t {
    shadowing = 1,
    rate_map = 2,
    user_states = 3,
    fading = 4,
    bootstrap = 5,
    oracle = 6,
};

// Deterministic stream derivation: the same (master seed, tag, index)
// triple always yields an identically seeded engine. Drops use index =
// drop number; scenario-frozen draws use index = 0.
inline std::mt19937_64 make_rng(std::uint64_t master, StreamTag tag, std::uint64_t index = 0) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= static_cast<std::uint64_t>(tag) * 0xd1342543de82ef95ULL;
    (void)splitmix64(s);
    s ^= index * 0xaf251af3b0f025b5ULL;
    return std::mt19937_64(splitmix64(s));
}

inline double draw_gaussian(std::mt19937_64 &rng, double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(rng);
}

// Circularly-symmetric complex Gaussian with unit variance (E|g|^2 = 1).
inline std::complex<double> draw_cn(std::mt19937_64 &rng) {
    std::normal_distribution<double> d(0.0, std::sqrt(0.5));
    const double re = d(rng);
    const double im = d(rng);
    return {re, im};
}

} // namespace locache

#endif
