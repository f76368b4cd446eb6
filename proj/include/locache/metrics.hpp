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

#ifndef LOCACHE_METRICS_HPP
#define LOCACHE_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "locache/allocation.hpp"
#include "locache/beamforming.hpp"
#include "locache/combinatorics.hpp"
#include "locache/delivery.hpp"

namespace locache {

// Time to finish one transmission: the slowest served user's payload
// over its symmetric message rate. A positive payload with zero rate
// makes the transmission, and the whole realization, unbounded.
inline double transmission_time(const std::vector<double> &payloads,
                                const std::vector<double> &rates) {
    if (payloads.size() != rates.size())
        throw std::domain_error("transmission_time: payload/rate size mismatch");
    double t = 0;
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        if (payloads[i] <= 0)
            continue;
        if (rates[i] <= 0)
            return std::numeric_limits<double>::infinity();
        t = std::max(t, payloads[i] / rates[i]);
    }
    return t;
}

inline double transmission_time(const BeamProblem &problem, const BeamformerSolution &sol) {
    return transmission_time(problem.weight, sol.rate);
}

struct DeliveryReport {
    std::vector<double> per_transmission; // seconds
    double total = 0;
    std::vector<double> served;    // per user, data units
    std::vector<double> user_rate; // per user, served / total
    std::string scheme;
    std::uint64_t seed = 0;
    bool censored = false; // some payload had zero rate
};

// Sums per-transmission times over a plan given one solved beamformer
// per transmission.
inline DeliveryReport total_time(const TransmissionPlan &plan,
                                 const std::vector<BeamProblem> &problems,
                                 const std::vector<BeamformerSolution> &solutions) {
    if (problems.size() != plan.transmissions.size() || solutions.size() != problems.size())
        throw std::domain_error("total_time: need one solution per transmission");
    DeliveryReport rep;
    rep.served.assign(static_cast<std::size_t>(plan.user_count), 0.0);
    rep.user_rate.assign(static_cast<std::size_t>(plan.user_count), 0.0);
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const double t = transmission_time(problems[i], solutions[i]);
        rep.per_transmission.push_back(t);
        rep.total += t;
        if (std::isinf(t))
            rep.censored = true;
    }
    for (const Transmission &tx : plan.transmissions)
        for (const Codeword &cw : tx.codewords)
            for (const DataTerm &term : cw.terms)
                rep.served[static_cast<std::size_t>(term.user)] += to_double(term.payload);
    if (rep.total > 0 && std::isfinite(rep.total))
        for (std::size_t k = 0; k < rep.served.size(); ++k)
            rep.user_rate[k] = rep.served[k] / rep.total;
    return rep;
}

// Closed-form total delivery time of the full nested multicast schedule
// when every user keeps one rate across transmissions: a sum over
// serving sets of the slowest member's (1 - m_k)/R_k, divided by the
// per-user codeword counts.
inline double eq18_total_time(const std::vector<double> &missing,
                              const std::vector<double> &rates, int t_hat, int alpha) {
    const int K = static_cast<int>(missing.size());
    if (static_cast<int>(rates.size()) != K)
        throw std::domain_error("eq18_total_time: missing/rates size mismatch");
    const double denom = static_cast<double>(binomial(K - 1, t_hat + alpha - 1)) *
                         static_cast<double>(binomial(t_hat + alpha - 1, t_hat));
    double sum = 0;
    bool unbounded = false;
    for_each_subset_mask(K, t_hat + alpha, [&](Mask serve) {
        double worst = 0;
        for (int k : elements_of(serve)) {
            if (missing[static_cast<std::size_t>(k)] <= 0)
                continue;
            if (rates[static_cast<std::size_t>(k)] <= 0) {
                unbounded = true;
                continue;
            }
            worst = std::max(worst, missing[static_cast<std::size_t>(k)] /
                                        rates[static_cast<std::size_t>(k)]);
        }
        sum += worst;
    });
    if (unbounded)
        return std::numeric_limits<double>::infinity();
    return sum / denom;
}

// Estimate of the total delivery time from the allocation alone:
// T = K/(t_bar + alpha) * max_s (1 - m(s))/r(s).
inline double approx_total_time(const MemoryAllocation &allocation, const RateMap &rate_map,
                                int K, int alpha) {
    if (static_cast<int>(allocation.m.size()) != rate_map.size())
        throw std::domain_error("approx_total_time: allocation and rate map disagree");
    double worst = 0;
    for (int s = 0; s < rate_map.size(); ++s)
        worst = std::max(worst, (1.0 - allocation.m[static_cast<std::size_t>(s)]) /
                                    rate_map.r[static_cast<std::size_t>(s)]);
    const double t_bar = K * allocation.m_bar;
    return K / (t_bar + alpha) * worst;
}

// Per-stream rate ratio between the non-uniform scheme at common gain
// t_hat and the uniform scheme at gain t: how much beamforming rate gain
// compensates the DoF loss.
inline double rate_ratio(double r_w, double r_u, int t_hat, double t, int alpha) {
    if (r_u <= 0 || t + alpha <= 0)
        throw std::domain_error("rate_ratio: denominator must be positive");
    return (static_cast<double>(t_hat + alpha) * r_w) / ((t + alpha) * r_u);
}

} // namespace locache

#endif
