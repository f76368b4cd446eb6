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

#ifndef LOCACHE_ENVIRONMENT_HPP
#define LOCACHE_ENVIRONMENT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "locache/common.hpp"
#include "locache/rng.hpp"

namespace locache {

// Geometry, radio and calibration parameters of one scenario. The service
// area is a rectangular room tiled into equal square states; the
// transmitter is a single L-antenna unit at a fixed 3D position.
struct EnvironmentConfig {
    double room_width_m = 10.0;
    double room_depth_m = 10.0;
    double tile_size_m = 1.0;
    // Transmitter position; NaN for x/y means "room center".
    double tx_x = std::numeric_limits<double>::quiet_NaN();
    double tx_y = std::numeric_limits<double>::quiet_NaN();
    double tx_z = 5.0;
    int antenna_count = 4;     // L
    int multiplexing_gain = 2; // alpha, number of parallel streams used
    double carrier_ghz = 2.0;  // f in the 32.4 dB path-loss constant (GHz)
    double pathloss_exponent = 3.0;
    double shadowing_std_db = 8.0;
    double noise_power = 1.0; // N0, normalized watts
    double border_snr_db = 0.0;
    double rate_scale = 1.0; // pre-log factor x bandwidth / file size, folded
    std::uint64_t rng_seed = 1;
    int rate_samples = 1000; // Monte Carlo samples per state for the rate map

    double tx_pos_x() const { return std::isnan(tx_x) ? room_width_m / 2.0 : tx_x; }
    double tx_pos_y() const { return std::isnan(tx_y) ? room_depth_m / 2.0 : tx_y; }

    void validate() const {
        if (room_width_m <= 0 || room_depth_m <= 0 || tile_size_m <= 0)
            throw config_error("room dimensions and tile size must be positive");
        const double nx = room_width_m / tile_size_m;
        const double ny = room_depth_m / tile_size_m;
        if (std::abs(nx - std::round(nx)) > 1e-9 || std::abs(ny - std::round(ny)) > 1e-9)
            throw config_error("room dimensions must be divisible by the tile size");
        if (antenna_count < 1)
            throw config_error("antenna_count must be >= 1");
        if (multiplexing_gain < 1 || multiplexing_gain > antenna_count)
            throw config_error("multiplexing_gain must satisfy 1 <= alpha <= L");
        if (pathloss_exponent <= 0)
            throw config_error("pathloss_exponent must be positive");
        if (shadowing_std_db < 0)
            throw config_error("shadowing_std_db must be nonnegative");
        if (noise_power <= 0)
            throw config_error("noise_power must be positive");
        if (rate_scale <= 0)
            throw config_error("rate_scale must be positive");
        if (rate_samples < 1)
            throw config_error("rate_samples must be >= 1");
    }
};

// One spatial tile. All points inside it share the frozen shadowing draw;
// the distance stored here is from the tile center to the transmitter.
struct State {
    int index = 0;
    double cx = 0, cy = 0;    // tile center, meters
    double distance = 0;      // 3D distance to the transmitter, meters
    double shadowing_db = 0;  // frozen per-state shadowing
};

struct StateGrid {
    int nx = 0, ny = 0;
    double tile = 1.0;
    std::vector<State> states;
    int size() const { return static_cast<int>(states.size()); }
};

// Per-state normalized expected throughput (files/second).
struct RateMap {
    std::vector<double> r;
    int size() const { return static_cast<int>(r.size()); }
};

// One drop's channels: state index and channel vector per user.
struct ChannelRealization {
    std::vector<int> user_states;
    std::vector<Eigen::VectorXcd> h;
};

inline double distance_to_tx(double x, double y, const EnvironmentConfig &cfg) {
    const double dx = x - cfg.tx_pos_x();
    const double dy = y - cfg.tx_pos_y();
    return std::sqrt(dx * dx + dy * dy + cfg.tx_z * cfg.tx_z);
}

// Indoor path loss in dB at distance d, with an explicit shadowing term:
// 32.4 + 20 log10(f[GHz]) + 10 eta log10(d) + zeta.
inline double pathloss_db(double distance_m, double shadowing_db, const EnvironmentConfig &cfg) {
    if (distance_m <= 0)
        throw std::domain_error("pathloss_db: distance must be positive");
    return 32.4 + 20.0 * std::log10(cfg.carrier_ghz) +
           10.0 * cfg.pathloss_exponent * std::log10(distance_m) + shadowing_db;
}

inline double pathloss_db(const State &s, const EnvironmentConfig &cfg) {
    return pathloss_db(s.distance, s.shadowing_db, cfg);
}

inline double linear_gain_from_db(double pl_db) { return std::pow(10.0, -pl_db / 10.0); }

// Builds the state lattice and freezes one shadowing draw per state.
// The draw is a standard normal scaled by sigma, so sweeping sigma with a
// fixed seed rescales the same frozen field instead of redrawing it.
inline StateGrid build_grid(const EnvironmentConfig &cfg) {
    cfg.validate();
    StateGrid grid;
    grid.nx = static_cast<int>(std::round(cfg.room_width_m / cfg.tile_size_m));
    grid.ny = static_cast<int>(std::round(cfg.room_depth_m / cfg.tile_size_m));
    grid.tile = cfg.tile_size_m;
    auto rng = make_rng(cfg.rng_seed, StreamTag::shadowing);
    grid.states.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            State s;
            s.index = j * grid.nx + i;
            s.cx = (i + 0.5) * cfg.tile_size_m;
            s.cy = (j + 0.5) * cfg.tile_size_m;
            s.distance = distance_to_tx(s.cx, s.cy, cfg);
            s.shadowing_db = draw_gaussian(rng) * cfg.shadowing_std_db;
            if (s.distance <= 0)
                throw config_error("transmitter coincides with a tile center");
            grid.states.push_back(s);
        }
    }
    return grid;
}

// Transmit power such that the mean received SNR at the farthest state
// (shadowing zeroed) equals border_snr_db. Ties break to the lowest index.
inline double calibrate_power(const EnvironmentConfig &cfg, const StateGrid &grid) {
    int far_idx = 0;
    for (int s = 1; s < grid.size(); ++s)
        if (grid.states[s].distance > grid.states[far_idx].distance)
            far_idx = s;
    const double pl0 = pathloss_db(grid.states[far_idx].distance, 0.0, cfg);
    return cfg.noise_power * std::pow(10.0, (cfg.border_snr_db + pl0) / 10.0);
}

// Rayleigh-faded channel vectors for users pinned to states: h_k =
// sqrt(state linear gain) * g_k with g_k ~ CN(0, I_L).
inline ChannelRealization draw_channels(const StateGrid &grid, const std::vector<int> &user_states,
                                        const EnvironmentConfig &cfg, std::mt19937_64 &rng) {
    ChannelRealization out;
    out.user_states = user_states;
    out.h.reserve(user_states.size());
    for (int s : user_states) {
        if (s < 0 || s >= grid.size())
            throw std::domain_error("draw_channels: unknown state index");
        const double gain = linear_gain_from_db(pathloss_db(grid.states[s], cfg));
        const double amp = std::sqrt(gain);
        Eigen::VectorXcd h(cfg.antenna_count);
        for (int l = 0; l < cfg.antenna_count; ++l)
            h(l) = amp * draw_cn(rng);
        out.h.push_back(std::move(h));
    }
    return out;
}

// Estimates r(s) = scale * E[log2(1 + P_T ||h||^2 / N0)] per state. The
// expectation averages user positions uniform inside the tile (moving the
// distance term) and fresh fading; the frozen shadowing stays fixed. The
// same offsets and fading are reused across states (common random numbers)
// so that the map ordering reflects geometry, not sampling noise.
inline RateMap estimate_rate_map(const StateGrid &grid, const EnvironmentConfig &cfg, int n_samples) {
    if (n_samples < 1)
        throw config_error("estimate_rate_map: n_samples must be >= 1");
    const double p_t = calibrate_power(cfg, grid);
    auto rng = make_rng(cfg.rng_seed, StreamTag::rate_map);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    const int L = cfg.antenna_count;
    std::vector<double> off_x(n_samples), off_y(n_samples);
    std::vector<double> fade_norm2(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        off_x[i] = uni(rng) * grid.tile;
        off_y[i] = uni(rng) * grid.tile;
        double n2 = 0;
        for (int l = 0; l < L; ++l)
            n2 += std::norm(draw_cn(rng));
        fade_norm2[i] = n2;
    }
    RateMap map;
    map.r.resize(grid.size());
    for (int s = 0; s < grid.size(); ++s) {
        const State &st = grid.states[s];
        double acc = 0;
        for (int i = 0; i < n_samples; ++i) {
            const double d = distance_to_tx(st.cx + off_x[i], st.cy + off_y[i], cfg);
            const double gain = linear_gain_from_db(pathloss_db(d, st.shadowing_db, cfg));
            acc += std::log2(1.0 + p_t * gain * fade_norm2[i] / cfg.noise_power);
        }
        map.r[s] = cfg.rate_scale * acc / n_samples;
    }
    return map;
}

} // namespace locache

#endif
