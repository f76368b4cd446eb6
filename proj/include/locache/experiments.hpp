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

#ifndef LOCACHE_EXPERIMENTS_HPP
#define LOCACHE_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "locache/allocation.hpp"
#include "locache/beamforming.hpp"
#include "locache/delivery.hpp"
#include "locache/environment.hpp"
#include "locache/metrics.hpp"
#include "locache/placement.hpp"
#include "locache/rng.hpp"

namespace locache {

// ---------------------------------------------------------------------
// Schemes
// ---------------------------------------------------------------------

enum class AllocationRule {
    uniform,        // m(s) = M/S everywhere, allocator bypassed
    local_first,    // heavy m_bar weight, memory goes to the best states
    multicast_aware // balanced weight alpha/K
};

enum class DeliveryRule {
    unicast_only,       // per-user transmissions, no coding
    multicast,          // nested schedule with phantom lift to the target gain
    multicast_nophantom // nested schedule at the realized common gain
};

struct SchemeSpec {
    std::string name;
    AllocationRule allocation = AllocationRule::multicast_aware;
    DeliveryRule delivery = DeliveryRule::multicast;
};

inline double tradeoff_weight(AllocationRule rule, int K, int alpha) {
    const double base = static_cast<double>(alpha) / K;
    switch (rule) {
    case AllocationRule::local_first:
        return 1e6 * base;
    case AllocationRule::multicast_aware:
        return base;
    case AllocationRule::uniform:
        break;
    }
    throw std::domain_error("tradeoff_weight: uniform rule has no weight");
}

inline SchemeSpec scheme_by_name(const std::string &name) {
    if (name == "ms_uniform")
        return {name, AllocationRule::uniform, DeliveryRule::multicast_nophantom};
    if (name == "proposed_local_first_unicast")
        return {name, AllocationRule::local_first, DeliveryRule::unicast_only};
    if (name == "proposed_local_first")
        return {name, AllocationRule::local_first, DeliveryRule::multicast};
    if (name == "proposed_multicast_aware")
        return {name, AllocationRule::multicast_aware, DeliveryRule::multicast};
    if (name == "proposed_local_first_nophantom")
        return {name, AllocationRule::local_first, DeliveryRule::multicast_nophantom};
    if (name == "proposed_multicast_aware_nophantom")
        return {name, AllocationRule::multicast_aware, DeliveryRule::multicast_nophantom};
    throw config_error("unknown scheme: " + name);
}

inline std::vector<SchemeSpec> default_schemes() {
    return {scheme_by_name("ms_uniform"), scheme_by_name("proposed_local_first_unicast"),
            scheme_by_name("proposed_local_first"), scheme_by_name("proposed_multicast_aware")};
}

inline std::vector<SchemeSpec> ablation_schemes() {
    auto v = default_schemes();
    v.push_back(scheme_by_name("proposed_local_first_nophantom"));
    v.push_back(scheme_by_name("proposed_multicast_aware_nophantom"));
    return v;
}

// ---------------------------------------------------------------------
// Scenario preparation
// ---------------------------------------------------------------------

struct Scenario {
    EnvironmentConfig env;
    int user_count = 4;
    double total_memory = 33.0; // M, in state-file units
    int t_target = -1;          // nested-schedule target gain; -1 derives round(K*M/S)
    int drops = 200;
    SolverOptions solver{8, 1e-3, 1e-4};

    void validate() const {
        env.validate();
        if (user_count < 1 || user_count > kMaxUsers)
            throw config_error("scenario: user_count out of range");
        if (total_memory < 0)
            throw config_error("scenario: total_memory must be >= 0");
        if (drops < 1)
            throw config_error("scenario: drops must be >= 1");
    }

    int resolved_t_target(int state_count) const {
        if (t_target >= 0)
            return t_target;
        return static_cast<int>(std::lround(user_count * total_memory / state_count));
    }
};

inline MemoryAllocation uniform_allocation(const RateMap &rate_map, double M, int K) {
    const int S = rate_map.size();
    MemoryAllocation a;
    a.user_count = K;
    const double m = std::clamp(M / S, 0.0, 1.0);
    a.m.assign(static_cast<std::size_t>(S), m);
    a.m_bar = m;
    a.gamma = 0;
    for (int s = 0; s < S; ++s)
        a.gamma = std::max(a.gamma, (1.0 - m) / rate_map.r[static_cast<std::size_t>(s)]);
    a.objective = m > 0 ? a.gamma / m : std::numeric_limits<double>::infinity();
    return a;
}

struct PreparedScheme {
    SchemeSpec spec;
    MemoryAllocation allocation;
    CacheLayout layout;
};

struct PreparedScenario {
    Scenario scenario;
    StateGrid grid;
    RateMap rate_map;
    double power = 0;
    int t_target = 0;
    std::vector<PreparedScheme> schemes;

    const PreparedScheme &scheme(const std::string &name) const {
        for (const PreparedScheme &ps : schemes)
            if (ps.spec.name == name)
                return ps;
        throw config_error("scenario not prepared for scheme: " + name);
    }
};

// Environment, rate map, and per-scheme allocation and placement are
// fixed across drops; only user positions and fading are redrawn.
inline PreparedScenario prepare_scenario(const Scenario &scenario,
                                         const std::vector<SchemeSpec> &schemes) {
    scenario.validate();
    PreparedScenario prep;
    prep.scenario = scenario;
    prep.grid = build_grid(scenario.env);
    prep.rate_map = estimate_rate_map(prep.grid, scenario.env, scenario.env.rate_samples);
    prep.power = calibrate_power(scenario.env, prep.grid);
    prep.t_target = scenario.resolved_t_target(prep.grid.size());
    for (const SchemeSpec &spec : schemes) {
        PreparedScheme ps;
        ps.spec = spec;
        if (spec.allocation == AllocationRule::uniform) {
            ps.allocation =
                uniform_allocation(prep.rate_map, scenario.total_memory, scenario.user_count);
        } else {
            AllocationProblem ap;
            ap.rate_map = prep.rate_map;
            ap.total_memory = scenario.total_memory;
            ap.user_count = scenario.user_count;
            ap.tradeoff = tradeoff_weight(spec.allocation, scenario.user_count,
                                          scenario.env.multiplexing_gain);
            ps.allocation = allocate(ap);
        }
        ps.layout = place(ps.allocation, scenario.user_count);
        prep.schemes.push_back(std::move(ps));
    }
    return prep;
}

// ---------------------------------------------------------------------
// Per-drop simulation
// ---------------------------------------------------------------------

inline std::vector<int> draw_user_states(const PreparedScenario &prep, int drop) {
    auto rng = make_rng(prep.scenario.env.rng_seed, StreamTag::user_states,
                        static_cast<std::uint64_t>(drop));
    std::uniform_int_distribution<int> pick(0, prep.grid.size() - 1);
    std::vector<int> states(static_cast<std::size_t>(prep.scenario.user_count));
    for (int &s : states)
        s = pick(rng);
    return states;
}

inline TransmissionPlan build_scheme_plan(const PreparedScheme &scheme,
                                          const std::vector<UserDemand> &demands, int alpha,
                                          int t_target) {
    switch (scheme.spec.delivery) {
    case DeliveryRule::unicast_only:
        return build_unicast_plan(demands, scheme.layout, alpha);
    case DeliveryRule::multicast:
        return build_phantom_plan(demands, scheme.layout, alpha, t_target);
    case DeliveryRule::multicast_nophantom:
        return build_phantom_plan(demands, scheme.layout, alpha, 0);
    }
    throw std::domain_error("build_scheme_plan: unknown delivery rule");
}

inline BeamformerSolution solve_transmission(const BeamProblem &problem,
                                             const SolverOptions &options) {
    if (problem.users.size() <= 1)
        return solve_mrt(problem);
    return solve_wmm_sca(problem, options);
}

// One Monte Carlo drop. User states and fading come from streams keyed
// only by (master seed, drop), so every scheme sees the same randomness.
inline DeliveryReport run_drop(const PreparedScenario &prep, const PreparedScheme &scheme,
                               int drop) {
    const Scenario &sc = prep.scenario;
    const std::vector<int> user_states = draw_user_states(prep, drop);
    auto fading_rng = make_rng(sc.env.rng_seed, StreamTag::fading, static_cast<std::uint64_t>(drop));
    const ChannelRealization ch = draw_channels(prep.grid, user_states, sc.env, fading_rng);

    const std::vector<UserDemand> demands = make_demands(user_states, scheme.layout);
    const TransmissionPlan plan =
        build_scheme_plan(scheme, demands, sc.env.multiplexing_gain, prep.t_target);
    assert_complete(plan, demands, scheme.layout);

    std::vector<BeamProblem> problems;
    std::vector<BeamformerSolution> solutions;
    problems.reserve(plan.transmissions.size());
    for (const Transmission &tx : plan.transmissions) {
        problems.push_back(make_beam_problem(tx, ch.h, prep.power, sc.env.noise_power));
        solutions.push_back(solve_transmission(problems.back(), sc.solver));
    }
    DeliveryReport rep = total_time(plan, problems, solutions);
    rep.scheme = scheme.spec.name;
    rep.seed = sc.env.rng_seed;
    return rep;
}

// ---------------------------------------------------------------------
// Sample statistics (censored realizations carry +inf)
// ---------------------------------------------------------------------

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest sample.
inline double percentile_nearest_rank(std::vector<double> samples, double p) {
    if (samples.empty())
        throw std::domain_error("percentile_nearest_rank: empty sample");
    if (p <= 0 || p > 100)
        throw std::domain_error("percentile_nearest_rank: p must be in (0, 100]");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return samples[rank - 1];
}

inline double mean_uncensored(const std::vector<double> &samples, int *censored = nullptr) {
    double sum = 0;
    int n = 0, inf = 0;
    for (double x : samples) {
        if (std::isinf(x)) {
            ++inf;
            continue;
        }
        sum += x;
        ++n;
    }
    if (censored != nullptr)
        *censored = inf;
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

inline double interquartile_range(const std::vector<double> &samples) {
    return percentile_nearest_rank(samples, 75.0) - percentile_nearest_rank(samples, 25.0);
}

struct BootstrapSummary {
    double point = 0;       // stat(a) - stat(b) on the original samples
    double lo = 0;          // 2.5th percentile of the resampled differences
    double hi = 0;          // 97.5th percentile
    double prob_ge_zero = 0; // fraction of resamples with stat(a) >= stat(b)
};

// Paired bootstrap over drop indices: schemes share randomness per drop,
// so resampling the same indices in both samples preserves the pairing.
template <typename Stat>
inline BootstrapSummary paired_bootstrap(const std::vector<double> &a,
                                         const std::vector<double> &b, Stat &&stat, int resamples,
                                         std::mt19937_64 &rng) {
    if (a.size() != b.size() || a.empty())
        throw std::domain_error("paired_bootstrap: samples must pair up");
    if (resamples < 1)
        throw std::domain_error("paired_bootstrap: resamples must be >= 1");
    BootstrapSummary out;
    out.point = stat(a) - stat(b);
    std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
    std::vector<double> ra(a.size()), rb(b.size());
    std::vector<double> diffs(static_cast<std::size_t>(resamples));
    int ge = 0;
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::size_t j = pick(rng);
            ra[i] = a[j];
            rb[i] = b[j];
        }
        const double d = stat(ra) - stat(rb);
        diffs[static_cast<std::size_t>(r)] = d;
        if (d >= 0)
            ++ge;
    }
    out.lo = percentile_nearest_rank(diffs, 2.5);
    out.hi = percentile_nearest_rank(diffs, 97.5);
    out.prob_ge_zero = static_cast<double>(ge) / resamples;
    return out;
}

// ---------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------

struct SchemeResult {
    std::string scheme;
    std::vector<double> totals; // per drop, +inf when censored
    int censored = 0;
    double mean = 0; // over uncensored drops
    double p50 = 0;
    double p95 = 0;
    double iqr = 0;
};

struct CdfResult {
    PreparedScenario prepared;
    std::vector<SchemeResult> schemes;

    const SchemeResult &scheme(const std::string &name) const {
        for (const SchemeResult &r : schemes)
            if (r.scheme == name)
                return r;
        throw config_error("no result for scheme: " + name);
    }
};

inline SchemeResult summarize_samples(const std::string &name, std::vector<double> totals) {
    SchemeResult r;
    r.scheme = name;
    r.mean = mean_uncensored(totals, &r.censored);
    r.p50 = percentile_nearest_rank(totals, 50.0);
    r.p95 = percentile_nearest_rank(totals, 95.0);
    r.iqr = interquartile_range(totals);
    r.totals = std::move(totals);
    return r;
}

inline CdfResult run_cdf_experiment(const Scenario &scenario,
                                    const std::vector<SchemeSpec> &schemes) {
    CdfResult out;
    out.prepared = prepare_scenario(scenario, schemes);
    for (const PreparedScheme &ps : out.prepared.schemes) {
        std::vector<double> totals;
        totals.reserve(static_cast<std::size_t>(scenario.drops));
        for (int drop = 0; drop < scenario.drops; ++drop)
            totals.push_back(run_drop(out.prepared, ps, drop).total);
        out.schemes.push_back(summarize_samples(ps.spec.name, std::move(totals)));
    }
    return out;
}

enum class SweepParameter { shadowing_std, border_snr, multiplexing_gain, memory_ratio, user_count };

inline SweepParameter sweep_parameter_by_name(const std::string &name) {
    if (name == "shadowing_std")
        return SweepParameter::shadowing_std;
    if (name == "border_snr")
        return SweepParameter::border_snr;
    if (name == "multiplexing_gain")
        return SweepParameter::multiplexing_gain;
    if (name == "memory_ratio")
        return SweepParameter::memory_ratio;
    if (name == "user_count")
        return SweepParameter::user_count;
    throw config_error("unknown sweep parameter: " + name);
}

inline std::string sweep_parameter_name(SweepParameter p) {
    switch (p) {
    case SweepParameter::shadowing_std:
        return "shadowing_std";
    case SweepParameter::border_snr:
        return "border_snr";
    case SweepParameter::multiplexing_gain:
        return "multiplexing_gain";
    case SweepParameter::memory_ratio:
        return "memory_ratio";
    case SweepParameter::user_count:
        return "user_count";
    }
    return "?";
}

inline Scenario apply_sweep_value(Scenario s, SweepParameter parameter, double value) {
    switch (parameter) {
    case SweepParameter::shadowing_std:
        s.env.shadowing_std_db = value;
        break;
    case SweepParameter::border_snr:
        s.env.border_snr_db = value;
        break;
    case SweepParameter::multiplexing_gain:
        s.env.multiplexing_gain = static_cast<int>(std::lround(value));
        break;
    case SweepParameter::memory_ratio: {
        const double nx = s.env.room_width_m / s.env.tile_size_m;
        const double ny = s.env.room_depth_m / s.env.tile_size_m;
        s.total_memory = value * std::round(nx) * std::round(ny);
        s.t_target = -1;
        break;
    }
    case SweepParameter::user_count:
        s.user_count = static_cast<int>(std::lround(value));
        s.t_target = -1;
        break;
    }
    return s;
}

struct SweepPoint {
    double value = 0;
    CdfResult result;
};

struct SweepResult {
    SweepParameter parameter = SweepParameter::shadowing_std;
    std::vector<SweepPoint> points;
};

// Sweeps one parameter. Within every point all schemes still pair up
// drop by drop; across points the same seed keeps the shadowing field
// and rate-map sampling common where the parameter allows it.
inline SweepResult run_sweep(const Scenario &base, const std::vector<SchemeSpec> &schemes,
                             SweepParameter parameter, const std::vector<double> &values) {
    if (values.empty())
        throw config_error("run_sweep: need at least one value");
    SweepResult out;
    out.parameter = parameter;
    for (double v : values) {
        SweepPoint pt;
        pt.value = v;
        pt.result = run_cdf_experiment(apply_sweep_value(base, parameter, v), schemes);
        out.points.push_back(std::move(pt));
    }
    return out;
}

} // namespace locache

#endif
