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

#include <cmath>

#include "locache/environment.hpp"

using namespace locache;

namespace {

EnvironmentConfig base_config() {
    EnvironmentConfig cfg;
    cfg.room_width_m = 10;
    cfg.room_depth_m = 10;
    cfg.tile_size_m = 1;
    cfg.rng_seed = 11;
    return cfg;
}

} // namespace

TEST(Grid, DimensionsAndCenters) {
    const StateGrid grid = build_grid(base_config());
    EXPECT_EQ(grid.nx, 10);
    EXPECT_EQ(grid.ny, 10);
    EXPECT_EQ(grid.size(), 100);
    // Row-major: index j*nx + i with centers at (i + 0.5, j + 0.5).
    EXPECT_DOUBLE_EQ(grid.states[0].cx, 0.5);
    EXPECT_DOUBLE_EQ(grid.states[0].cy, 0.5);
    EXPECT_DOUBLE_EQ(grid.states[13].cx, 3.5);
    EXPECT_DOUBLE_EQ(grid.states[13].cy, 1.5);
    EXPECT_DOUBLE_EQ(grid.states[99].cx, 9.5);
    EXPECT_DOUBLE_EQ(grid.states[99].cy, 9.5);
}

TEST(Grid, RejectsNonDivisibleTile) {
    EnvironmentConfig cfg = base_config();
    cfg.tile_size_m = 3;
    EXPECT_THROW(cfg.validate(), config_error);
}

TEST(Grid, DistanceIncludesTxHeight) {
    const EnvironmentConfig cfg = base_config();
    const StateGrid grid = build_grid(cfg);
    // Transmitter defaults to the room center at height 5.
    const double want = std::sqrt(4.5 * 4.5 + 4.5 * 4.5 + 25.0);
    EXPECT_NEAR(grid.states[0].distance, want, 1e-12);
    // The center tiles are closest.
    double dmin = grid.states[0].distance;
    for (const State &s : grid.states)
        dmin = std::min(dmin, s.distance);
    const int center = 5 * 10 + 5;
    EXPECT_NEAR(grid.states[center].distance,
                std::sqrt(0.5 * 0.5 + 0.5 * 0.5 + 25.0), 1e-12);
    EXPECT_DOUBLE_EQ(dmin, grid.states[center].distance);
}

TEST(Pathloss, MatchesHandFormula) {
    EnvironmentConfig cfg = base_config();
    cfg.carrier_ghz = 2.0;
    cfg.pathloss_exponent = 3.0;
    const double d = 7.3;
    const double zeta = 4.2;
    const double want = 32.4 + 20.0 * std::log10(2.0) + 30.0 * std::log10(7.3) + 4.2;
    EXPECT_NEAR(pathloss_db(d, zeta, cfg), want, 1e-12);
    EXPECT_NEAR(linear_gain_from_db(20.0), 0.01, 1e-15);
}

TEST(Shadowing, FrozenPerSeedAndLinearInSigma) {
    EnvironmentConfig cfg = base_config();
    cfg.shadowing_std_db = 8;
    const StateGrid a = build_grid(cfg);
    const StateGrid b = build_grid(cfg);
    for (int s = 0; s < a.size(); ++s)
        EXPECT_DOUBLE_EQ(a.states[s].shadowing_db, b.states[s].shadowing_db);

    // The same standard-normal field is rescaled, so halving sigma
    // halves every entry; sweeps move the strength, not the pattern.
    cfg.shadowing_std_db = 4;
    const StateGrid half = build_grid(cfg);
    bool any_nonzero = false;
    for (int s = 0; s < a.size(); ++s) {
        EXPECT_NEAR(half.states[s].shadowing_db, 0.5 * a.states[s].shadowing_db, 1e-12);
        any_nonzero = any_nonzero || a.states[s].shadowing_db != 0;
    }
    EXPECT_TRUE(any_nonzero);

    EnvironmentConfig other = cfg;
    other.rng_seed = 12;
    const StateGrid c = build_grid(other);
    int differing = 0;
    for (int s = 0; s < a.size(); ++s)
        if (c.states[s].shadowing_db != half.states[s].shadowing_db)
            ++differing;
    EXPECT_GT(differing, 90);
}

TEST(Power, CalibratedToBorderSnr) {
    EnvironmentConfig cfg = base_config();
    cfg.shadowing_std_db = 0;
    cfg.border_snr_db = 0;
    cfg.noise_power = 1;
    const StateGrid grid = build_grid(cfg);
    double dmax = 0;
    for (const State &s : grid.states)
        dmax = std::max(dmax, s.distance);
    const double pl0 = pathloss_db(dmax, 0.0, cfg);
    EXPECT_NEAR(calibrate_power(cfg, grid), std::pow(10.0, pl0 / 10.0), 1e-6);

    // 10 dB more target SNR costs exactly 10x the power.
    EnvironmentConfig boosted = cfg;
    boosted.border_snr_db = 10;
    EXPECT_NEAR(calibrate_power(boosted, grid) / calibrate_power(cfg, grid), 10.0, 1e-9);
}

TEST(Channels, DeterministicPerStream) {
    const EnvironmentConfig cfg = base_config();
    const StateGrid grid = build_grid(cfg);
    auto rng1 = make_rng(3, StreamTag::fading, 7);
    auto rng2 = make_rng(3, StreamTag::fading, 7);
    const ChannelRealization a = draw_channels(grid, {0, 17, 99}, cfg, rng1);
    const ChannelRealization b = draw_channels(grid, {0, 17, 99}, cfg, rng2);
    ASSERT_EQ(a.h.size(), 3u);
    for (std::size_t k = 0; k < a.h.size(); ++k) {
        ASSERT_EQ(a.h[k].size(), cfg.antenna_count);
        EXPECT_EQ((a.h[k] - b.h[k]).norm(), 0.0);
    }
    auto rng3 = make_rng(3, StreamTag::fading, 8);
    const ChannelRealization c = draw_channels(grid, {0, 17, 99}, cfg, rng3);
    EXPECT_GT((a.h[0] - c.h[0]).norm(), 0.0);
}

TEST(Channels, RejectsUnknownState) {
    const EnvironmentConfig cfg = base_config();
    const StateGrid grid = build_grid(cfg);
    auto rng = make_rng(3, StreamTag::fading, 0);
    EXPECT_THROW(draw_channels(grid, {100}, cfg, rng), std::domain_error);
}

TEST(RateMap, DeterministicPositiveAndScaleLinear) {
    EnvironmentConfig cfg = base_config();
    cfg.rate_samples = 200;
    const StateGrid grid = build_grid(cfg);
    const RateMap a = estimate_rate_map(grid, cfg, cfg.rate_samples);
    const RateMap b = estimate_rate_map(grid, cfg, cfg.rate_samples);
    ASSERT_EQ(a.size(), grid.size());
    for (int s = 0; s < a.size(); ++s) {
        EXPECT_GT(a.r[s], 0);
        EXPECT_DOUBLE_EQ(a.r[s], b.r[s]);
    }
    EnvironmentConfig scaled = cfg;
    scaled.rate_scale = 2.0;
    const RateMap c = estimate_rate_map(grid, scaled, cfg.rate_samples);
    for (int s = 0; s < a.size(); ++s)
        EXPECT_NEAR(c.r[s], 2.0 * a.r[s], 1e-12 * c.r[s]);
}

TEST(RateMap, GeometryOrdersRates) {
    EnvironmentConfig cfg = base_config();
    cfg.shadowing_std_db = 0;
    cfg.rate_samples = 400;
    const StateGrid grid = build_grid(cfg);
    const RateMap map = estimate_rate_map(grid, cfg, cfg.rate_samples);
    // Without shadowing, common sampling noise makes the center tile
    // strictly better than the corner tile.
    const int center = 5 * 10 + 5;
    EXPECT_GT(map.r[center], map.r[0]);
}
