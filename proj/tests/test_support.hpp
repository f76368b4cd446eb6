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

#ifndef LOCACHE_TEST_SUPPORT_HPP
#define LOCACHE_TEST_SUPPORT_HPP

#include <functional>
#include <random>
#include <vector>

#include "locache/beamforming.hpp"
#include "locache/delivery.hpp"
#include "locache/placement.hpp"
#include "locache/rng.hpp"

namespace locache_test {

using namespace locache;

// One beamforming instance built from a real delivery plan: uniform
// integer gains, every user on its own state, channels with a random
// per-user gain spread.
struct BeamInstance {
    CacheLayout layout;
    std::vector<UserDemand> demands;
    TransmissionPlan plan;
    std::vector<Eigen::VectorXcd> h;
    BeamProblem problem;
};

inline BeamInstance make_instance(std::uint64_t seed, const std::vector<double> &gains, int L,
                                  int alpha, double power = 1.0, double noise = 1.0,
                                  std::size_t tx_index = 0, double spread_db = 20.0) {
    BeamInstance inst;
    const int K = static_cast<int>(gains.size());
    inst.layout = place_gains(gains, K);
    std::vector<int> states(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        states[static_cast<std::size_t>(k)] = k;
    inst.demands = make_demands(states, inst.layout);
    inst.plan = build_multicast_plan(inst.demands, inst.layout, alpha, common_gain(inst.demands));
    auto rng = make_rng(seed, StreamTag::oracle);
    std::uniform_real_distribution<double> uni(-spread_db, 0.0);
    for (int k = 0; k < K; ++k) {
        const double amp = std::pow(10.0, uni(rng) / 20.0);
        Eigen::VectorXcd hk(L);
        for (int l = 0; l < L; ++l)
            hk(l) = amp * draw_cn(rng);
        inst.h.push_back(hk);
    }
    inst.problem =
        make_beam_problem(inst.plan.transmissions.at(tx_index), inst.h, power, noise);
    return inst;
}

// Randomized search over full-power beamformer sets, evaluated with the
// library's own honest rate accounting. Serves as an independent upper
// bound witness: the optimizer must come close to the best sample.
inline double random_beam_oracle(const BeamProblem &p, int samples, std::uint64_t seed) {
    auto rng = make_rng(seed, StreamTag::oracle, 1);
    const int J = p.message_count();
    double best = 0;
    BeamformerSolution sol;
    sol.v.assign(static_cast<std::size_t>(J), Eigen::VectorXcd::Zero(p.antenna_count));
    for (int it = 0; it < samples; ++it) {
        double norm2 = 0;
        for (int j = 0; j < J; ++j) {
            Eigen::VectorXcd v(p.antenna_count);
            for (int l = 0; l < p.antenna_count; ++l)
                v(l) = draw_cn(rng);
            sol.v[static_cast<std::size_t>(j)] = v;
            norm2 += v.squaredNorm();
        }
        const double scale = std::sqrt(p.power / norm2);
        for (int j = 0; j < J; ++j)
            sol.v[static_cast<std::size_t>(j)] *= scale;
        detail::fill_rates(p, sol);
        best = std::max(best, sol.objective);
    }
    return best;
}

// Brute-force multiple-access rate: minimum over every nonempty subset
// of messages, written independently from the sorted-prefix shortcut.
inline double brute_mac_rate(const std::vector<double> &gammas) {
    const int n = static_cast<int>(gammas.size());
    if (n == 0)
        return 0;
    double best = std::numeric_limits<double>::infinity();
    for (Mask q = 1; q < (Mask{1} << n); ++q) {
        double sum = 0;
        for (int i = 0; i < n; ++i)
            if (q & (Mask{1} << i))
                sum += gammas[static_cast<std::size_t>(i)];
        best = std::min(best, std::log2(1.0 + sum) / popcount(q));
    }
    return best;
}

// Visits every non-decreasing integer vector of length K with entries
// in [0, max_value]: the multiset representatives under user permutation.
inline void for_each_multiset(int K, int max_value,
                              const std::function<void(const std::vector<int> &)> &visit) {
    std::vector<int> t(static_cast<std::size_t>(K), 0);
    while (true) {
        visit(t);
        int i = K - 1;
        while (i >= 0 && t[static_cast<std::size_t>(i)] == max_value)
            --i;
        if (i < 0)
            return;
        const int v = t[static_cast<std::size_t>(i)] + 1;
        for (int j = i; j < K; ++j)
            t[static_cast<std::size_t>(j)] = v;
    }
}

} // namespace locache_test

#endif
