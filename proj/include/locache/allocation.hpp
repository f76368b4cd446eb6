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

#ifndef LOCACHE_ALLOCATION_HPP
#define LOCACHE_ALLOCATION_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "locache/common.hpp"
#include "locache/environment.hpp"

namespace locache {

// Cache memory budget split problem: choose per-state fractions m(s) that
// balance the worst normalized fetch time gamma = max_s (1-m(s))/r(s)
// against the guaranteed minimum fraction m_bar, weighted by phi.
struct AllocationProblem {
    RateMap rate_map;
    double total_memory = 1.0; // M, in units of state files
    int user_count = 1;        // K, used to report caching gains t(s)
    double tradeoff = 0.5;     // phi > 0

    void validate() const {
        const int S = rate_map.size();
        if (S == 0)
            throw config_error("allocation: empty rate map");
        if (!(total_memory > 0))
            throw config_error("allocation: total memory must be positive");
        if (total_memory > S)
            throw config_error("allocation: total memory exceeds state count");
        if (user_count < 1)
            throw config_error("allocation: user_count must be >= 1");
        if (!(tradeoff > 0))
            throw config_error("allocation: tradeoff must be positive");
        for (double r : rate_map.r)
            if (!(r > 0))
                throw config_error("allocation: rates must be positive");
    }
};

struct MemoryAllocation {
    std::vector<double> m;  // per-state cache fraction in [0,1]
    double m_bar = 0;       // min_s m(s)
    double gamma = 0;       // max_s (1-m(s))/r(s)
    double objective = 0;   // gamma / (m_bar + phi)
    int user_count = 1;

    double gain(int s) const { return user_count * m[static_cast<std::size_t>(s)]; }
    double t_bar() const { return user_count * m_bar; }
};

struct WaterFillResult {
    std::vector<double> m;
    double gamma = 0;
};

// Minimizes gamma = max_s (1-m(s))/r(s) subject to m(s) >= floor,
// m(s) <= 1 and sum m <= M. The optimum equalizes (1-m(s))/r(s) = gamma
// on every state not pinned at the floor, so it reduces to one scalar
// root in gamma, solved exactly segment by segment over the sorted
// floor-activation thresholds.
inline WaterFillResult water_fill(const RateMap &rate_map, double M, double m_bar_floor) {
    const int S = rate_map.size();
    if (S == 0)
        throw std::domain_error("water_fill: empty rate map");
    if (m_bar_floor < 0 || m_bar_floor > 1)
        throw std::domain_error("water_fill: floor must lie in [0,1]");
    if (m_bar_floor * S > M + 1e-12)
        throw std::domain_error("water_fill: floor exceeds budget M/S");
    for (double r : rate_map.r)
        if (!(r > 0))
            throw std::domain_error("water_fill: rates must be positive");

    WaterFillResult out;
    out.m.assign(static_cast<std::size_t>(S), 1.0);
    if (M >= S) {
        out.gamma = 0.0;
        return out;
    }

    // State s leaves the water level and pins to the floor once
    // gamma >= (1 - floor)/r(s). Sort states by that threshold.
    const double f = m_bar_floor;
    std::vector<int> order(static_cast<std::size_t>(S));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return rate_map.r[static_cast<std::size_t>(a)] > rate_map.r[static_cast<std::size_t>(b)];
    });
    auto threshold = [&](int s) { return (1.0 - f) / rate_map.r[static_cast<std::size_t>(s)]; };

    // With j states pinned, sum m = j f + (S-j) - gamma * (sum of active
    // rates) = M. Walk j upward until the root lands inside its segment.
    double active_rate_sum = std::accumulate(rate_map.r.begin(), rate_map.r.end(), 0.0);
    double gamma = (S - M) / active_rate_sum;
    for (int j = 0; j < S; ++j) {
        const double lo = (j == 0) ? 0.0 : threshold(order[static_cast<std::size_t>(j - 1)]);
        const double hi = threshold(order[static_cast<std::size_t>(j)]);
        const double cand = (S - j + j * f - M) / active_rate_sum;
        if (cand >= lo - 1e-15 && cand <= hi + 1e-15) {
            gamma = std::clamp(cand, lo, hi);
            break;
        }
        active_rate_sum -= rate_map.r[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        if (j == S - 1)
            gamma = hi; // every state pinned; budget slack absorbed at floor
    }

    double worst = 0;
    for (int s = 0; s < S; ++s) {
        const double r = rate_map.r[static_cast<std::size_t>(s)];
        out.m[static_cast<std::size_t>(s)] = std::clamp(std::max(f, 1.0 - gamma * r), 0.0, 1.0);
        worst = std::max(worst, (1.0 - out.m[static_cast<std::size_t>(s)]) / r);
    }
    out.gamma = worst;
    return out;
}

namespace detail {

inline MemoryAllocation finish_allocation(const AllocationProblem &p, const WaterFillResult &wf) {
    MemoryAllocation a;
    a.m = wf.m;
    a.gamma = wf.gamma;
    a.m_bar = *std::min_element(a.m.begin(), a.m.end());
    a.objective = a.gamma / (a.m_bar + p.tradeoff);
    a.user_count = p.user_count;
    return a;
}

// Objective of the best allocation whose minimum fraction is pinned to v.
inline double floor_objective(const AllocationProblem &p, double v) {
    const auto wf = water_fill(p.rate_map, p.total_memory, v);
    double mn = *std::min_element(wf.m.begin(), wf.m.end());
    return wf.gamma / (mn + p.tradeoff);
}

} // namespace detail

// Solves the fractional program min gamma/(m_bar + phi) over feasible
// allocations. For any fixed floor v the inner problem is the exact
// water-fill above, and the outer objective h(v) is quasiconvex in v, so
// a coarse scan brackets the minimizer and golden-section search refines
// it. The scan granularity of 512 cells keeps the bracket valid for the
// piecewise-linear kinks produced by realistic map sizes.
inline MemoryAllocation allocate(const AllocationProblem &problem) {
    problem.validate();
    const int S = problem.rate_map.size();
    const double v_max = std::min(1.0, problem.total_memory / S);
    if (problem.total_memory >= S)
        return detail::finish_allocation(problem, water_fill(problem.rate_map, problem.total_memory, 1.0));

    const int cells = 512;
    int best_i = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= cells; ++i) {
        const double v = v_max * i / cells;
        const double val = detail::floor_objective(problem, v);
        if (val < best_val) {
            best_val = val;
            best_i = i;
        }
    }
    double lo = v_max * std::max(0, best_i - 1) / cells;
    double hi = v_max * std::min(cells, best_i + 1) / cells;

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = detail::floor_objective(problem, x1);
    double f2 = detail::floor_objective(problem, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = detail::floor_objective(problem, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = detail::floor_objective(problem, x2);
        }
    }
    double v_star = (lo + hi) / 2;
    // The refined point may tie the scan minimum along a flat valley;
    // keep whichever evaluates lower.
    if (detail::floor_objective(problem, v_star) > best_val)
        v_star = v_max * best_i / cells;
    return detail::finish_allocation(problem, water_fill(problem.rate_map, problem.total_memory, v_star));
}

// Brute-force reference: dense floor scan without refinement. Intended
// for tests on small instances only.
inline MemoryAllocation allocation_oracle(const AllocationProblem &problem, int grid_points = 200001) {
    problem.validate();
    const int S = problem.rate_map.size();
    if (S > 50)
        throw std::domain_error("allocation_oracle: instance too large (S > 50)");
    if (grid_points < 2)
        throw std::domain_error("allocation_oracle: need at least two grid points");
    const double v_max = std::min(1.0, problem.total_memory / S);
    double best_v = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double v = v_max * i / (grid_points - 1);
        const double val = detail::floor_objective(problem, v);
        if (val < best_val) {
            best_val = val;
            best_v = v;
        }
    }
    return detail::finish_allocation(problem, water_fill(problem.rate_map, problem.total_memory, best_v));
}

} // namespace locache

#endif
