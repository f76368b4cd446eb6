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

#ifndef LOCACHE_COMBINATORICS_HPP
#define LOCACHE_COMBINATORICS_HPP

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace locache {

// Small sets of users are carried as bitmasks (bit k = user k).
using Mask = std::uint32_t;
inline constexpr int kMaxUsers = 30;

// Binomial coefficient C(n, k). Out-of-range arguments return 0, which is
// the value the scheduling formulas expect for empty selections.
inline std::int64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n)
        return 0;
    if (k > n - k)
        k = n - k;
    assert(n <= 62);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

inline int popcount(Mask m) { return std::popcount(m); }

inline constexpr Mask bit(int i) { return Mask{1} << i; }

inline Mask mask_of(const std::vector<int> &elems) {
    Mask m = 0;
    for (int e : elems)
        m |= Mask{1} << e;
    return m;
}

inline std::vector<int> elements_of(Mask m) {
    std::vector<int> out;
    for (int i = 0; m != 0; ++i, m >>= 1)
        if (m & 1u)
            out.push_back(i);
    return out;
}

// Advances a sorted k-subset of {0, ..., n-1} to its lexicographic
// successor. Returns false when c was the last subset.
inline bool next_combination(std::vector<int> &c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (int j = i + 1; j < k; ++j)
                c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Visits every k-subset of {0, ..., n-1} in lexicographic order.
// The visitor receives the subset as a sorted index vector.
template <typename F> inline void for_each_subset(int n, int k, F &&visit) {
    if (k < 0 || k > n)
        return;
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i)
        c[i] = i;
    do {
        visit(static_cast<const std::vector<int> &>(c));
    } while (next_combination(c, n));
}

// Visits every k-subset of {0, ..., n-1} as a bit mask, in lexicographic
// order of the sorted index sequences.
template <typename F> inline void for_each_subset_mask(int n, int k, F &&visit) {
    for_each_subset(n, k, [&](const std::vector<int> &idx) { visit(mask_of(idx)); });
}

// Visits every k-subset of the set encoded by `pool` as a bit mask, in
// lexicographic order of the underlying element indices.
template <typename F> inline void for_each_subset_of(Mask pool, int k, F &&visit) {
    const std::vector<int> elems = elements_of(pool);
    for_each_subset(static_cast<int>(elems.size()), k, [&](const std::vector<int> &idx) {
        Mask m = 0;
        for (int i : idx)
            m |= bit(elems[static_cast<std::size_t>(i)]);
        visit(m);
    });
}

} // namespace locache

#endif
