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

#ifndef LOCACHE_PLACEMENT_HPP
#define LOCACHE_PLACEMENT_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "locache/allocation.hpp"
#include "locache/combinatorics.hpp"
#include "locache/common.hpp"
#include "locache/rational.hpp"

namespace locache {

// A state file with non-integer caching gain is split into two parts
// placed at the bracketing integer gains; integer gains use one part.
enum class Part : std::uint8_t { whole = 0, part1 = 1, part2 = 2 };

inline const char *part_name(Part p) {
    switch (p) {
    case Part::whole: return "whole";
    case Part::part1: return "part1";
    case Part::part2: return "part2";
    }
    return "?";
}

// One cache unit: the piece of state s's file indexed by the user subset
// V. Exactly the users in V store it.
struct SubfileId {
    int state = 0;
    Part part = Part::whole;
    Mask subset = 0; // V
    Rational size;   // part_size / C(K, |V|)

    friend bool operator==(const SubfileId &a, const SubfileId &b) {
        return a.state == b.state && a.part == b.part && a.subset == b.subset;
    }
};

// Placement description of one state's file.
struct StatePlacement {
    struct PartLayout {
        Part part = Part::whole;
        int gain = 0;       // |V| for every subfile of this part
        Rational part_size; // fraction of the state file in this part
        Rational subfile_size;
    };
    int state = 0;
    Rational gain; // t(s), snapped when within 1e-9 of an integer
    std::vector<PartLayout> parts;
};

struct CacheLayout {
    int user_count = 0; // K
    std::vector<StatePlacement> states;

    const StatePlacement &at(int s) const {
        if (s < 0 || s >= static_cast<int>(states.size()))
            throw std::domain_error("cache layout: unknown state index");
        return states[static_cast<std::size_t>(s)];
    }
};

namespace detail {

inline StatePlacement place_state(int state, double t, int K) {
    if (t < -1e-9 || t > K + 1e-9)
        throw std::domain_error("place: caching gain outside [0, K]");
    StatePlacement sp;
    sp.state = state;
    const Rational t_rat = snap_gain(t);
    sp.gain = t_rat;
    if (is_integer(t_rat)) {
        const int g = floor_int(t_rat);
        StatePlacement::PartLayout pl;
        pl.part = Part::whole;
        pl.gain = g;
        pl.part_size = 1;
        pl.subfile_size = Rational(1) / binomial(K, g);
        sp.parts.push_back(pl);
    } else {
        const int g = floor_int(t_rat);
        StatePlacement::PartLayout p1, p2;
        p1.part = Part::part1;
        p1.gain = g;
        p1.part_size = Rational(g + 1) - t_rat;
        p1.subfile_size = p1.part_size / binomial(K, g);
        p2.part = Part::part2;
        p2.gain = g + 1;
        p2.part_size = t_rat - Rational(g);
        p2.subfile_size = p2.part_size / binomial(K, g + 1);
        sp.parts.push_back(p1);
        sp.parts.push_back(p2);
    }
    return sp;
}

} // namespace detail

// Assigns each state's subfiles to user caches from raw caching gains.
// Gains within 1e-9 of an integer are snapped; other values trigger the
// two-part memory-sharing split.
inline CacheLayout place_gains(const std::vector<double> &gains, int K) {
    if (K < 1)
        throw std::domain_error("place: K must be >= 1");
    if (K > kMaxUsers)
        throw std::domain_error("place: K exceeds supported user count");
    CacheLayout layout;
    layout.user_count = K;
    layout.states.reserve(gains.size());
    for (std::size_t s = 0; s < gains.size(); ++s)
        layout.states.push_back(detail::place_state(static_cast<int>(s), gains[s], K));
    return layout;
}

inline CacheLayout place(const MemoryAllocation &allocation, int K) {
    std::vector<double> gains(allocation.m.size());
    for (std::size_t s = 0; s < allocation.m.size(); ++s)
        gains[s] = K * allocation.m[s];
    return place_gains(gains, K);
}

// Full subfile inventory of one state, parts then lexicographic subsets.
inline std::vector<SubfileId> state_inventory(const CacheLayout &layout, int s) {
    const StatePlacement &sp = layout.at(s);
    std::vector<SubfileId> out;
    for (const auto &pl : sp.parts) {
        for_each_subset_mask(layout.user_count, pl.gain, [&](Mask V) {
            out.push_back(SubfileId{s, pl.part, V, pl.subfile_size});
        });
    }
    return out;
}

// Total size of state-s subfiles stored by user k; equals m(s) = t(s)/K.
inline Rational cached_fraction(const CacheLayout &layout, int k, int s) {
    const StatePlacement &sp = layout.at(s);
    if (k < 0 || k >= layout.user_count)
        throw std::domain_error("cached_fraction: unknown user");
    // User k appears in C(K-1, g-1) of the C(K, g) subsets, a g/K share
    // of each part's size.
    Rational total = 0;
    for (const auto &pl : sp.parts)
        total += pl.part_size * Rational(pl.gain) / layout.user_count;
    return total;
}

inline std::vector<SubfileId> missing_subfiles(const CacheLayout &layout, int k, int s) {
    if (k < 0 || k >= layout.user_count)
        throw std::domain_error("missing_subfiles: unknown user");
    std::vector<SubfileId> out;
    for (const SubfileId &sf : state_inventory(layout, s))
        if (!(sf.subset & bit(k)))
            out.push_back(sf);
    return out;
}

inline Rational used_memory(const CacheLayout &layout, int k) {
    Rational total = 0;
    for (const auto &sp : layout.states)
        total += cached_fraction(layout, k, sp.state);
    return total;
}

} // namespace locache

#endif
