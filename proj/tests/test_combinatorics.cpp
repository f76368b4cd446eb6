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

#include <gtest/gtest.h>

#include <set>

#include "locache/combinatorics.hpp"

using namespace locache;

TEST(Binomial, KnownValues) {
    EXPECT_EQ(binomial(0, 0), 1);
    EXPECT_EQ(binomial(4, 2), 6);
    EXPECT_EQ(binomial(5, 0), 1);
    EXPECT_EQ(binomial(5, 5), 1);
    EXPECT_EQ(binomial(10, 3), 120);
    EXPECT_EQ(binomial(52, 5), 2598960);
}

TEST(Binomial, OutOfRangeIsZero) {
    EXPECT_EQ(binomial(3, 4), 0);
    EXPECT_EQ(binomial(3, -1), 0);
    EXPECT_EQ(binomial(-1, 0), 0);
}

TEST(Binomial, PascalIdentity) {
    for (int n = 1; n <= 20; ++n)
        for (int k = 1; k < n; ++k)
            EXPECT_EQ(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
}

TEST(Masks, BitAndPopcount) {
    EXPECT_EQ(bit(0), Mask{1});
    EXPECT_EQ(bit(3), Mask{8});
    EXPECT_EQ(popcount(bit(0) | bit(3) | bit(7)), 3);
    EXPECT_EQ(popcount(Mask{0}), 0);
}

TEST(Masks, MaskOfElementsRoundTrip) {
    const std::vector<int> elems = {0, 2, 5};
    const Mask m = mask_of(elems);
    EXPECT_EQ(m, bit(0) | bit(2) | bit(5));
    EXPECT_EQ(elements_of(m), elems);
    EXPECT_TRUE(elements_of(Mask{0}).empty());
}

TEST(SubsetEnumeration, CountsMatchBinomial) {
    for (int n = 0; n <= 8; ++n)
        for (int k = 0; k <= n; ++k) {
            int count = 0;
            for_each_subset(n, k, [&](const std::vector<int> &sub) {
                EXPECT_EQ(static_cast<int>(sub.size()), k);
                ++count;
            });
            EXPECT_EQ(count, static_cast<int>(binomial(n, k)));
        }
}

TEST(SubsetEnumeration, SortedAndLexicographic) {
    std::vector<std::vector<int>> subs;
    for_each_subset(4, 2, [&](const std::vector<int> &sub) { subs.push_back(sub); });
    const std::vector<std::vector<int>> want = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    EXPECT_EQ(subs, want);
}

TEST(SubsetEnumeration, EmptyAndDegenerateCases) {
    int count = 0;
    for_each_subset(5, 0, [&](const std::vector<int> &sub) {
        EXPECT_TRUE(sub.empty());
        ++count;
    });
    EXPECT_EQ(count, 1);
    for_each_subset(3, 4, [&](const std::vector<int> &) { FAIL(); });
    for_each_subset(3, -1, [&](const std::vector<int> &) { FAIL(); });
}

TEST(SubsetEnumeration, MaskVariantAgrees) {
    for (int n = 0; n <= 7; ++n)
        for (int k = 0; k <= n; ++k) {
            std::vector<Mask> as_masks;
            for_each_subset(n, k,
                            [&](const std::vector<int> &sub) { as_masks.push_back(mask_of(sub)); });
            std::size_t i = 0;
            for_each_subset_mask(n, k, [&](Mask m) {
                ASSERT_LT(i, as_masks.size());
                EXPECT_EQ(m, as_masks[i]);
                ++i;
            });
            EXPECT_EQ(i, as_masks.size());
        }
}

TEST(SubsetEnumeration, PoolSubsets) {
    const Mask pool = bit(1) | bit(3) | bit(4) | bit(6);
    std::set<Mask> seen;
    for_each_subset_of(pool, 2, [&](Mask m) {
        EXPECT_EQ(popcount(m), 2);
        EXPECT_EQ(m & ~pool, Mask{0});
        seen.insert(m);
    });
    EXPECT_EQ(seen.size(), binomial(4, 2));
    int none = 0;
    for_each_subset_of(pool, 5, [&](Mask) { ++none; });
    EXPECT_EQ(none, 0);
    int empty = 0;
    for_each_subset_of(pool, 0, [&](Mask m) {
        EXPECT_EQ(m, Mask{0});
        ++empty;
    });
    EXPECT_EQ(empty, 1);
}
