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

// Release gate: nine numbered criteria, each with its own tolerance and
// wall-clock budget. Every test finishes by printing one line
//   [CRITERION n] <name>: PASS|FAIL (<elapsed>, budget <budget>)
// so the run log doubles as the sign-off sheet.

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <random>
#include <vector>

#include "locache/experiments.hpp"
#include "locache/metrics.hpp"
#include "test_support.hpp"

using namespace locache;

namespace {

class Criterion {
  public:
    Criterion(int index, std::string name, double budget_s)
        : index_(index), name_(std::move(name)), budget_s_(budget_s),
          start_(std::chrono::steady_clock::now()) {}

    ~Criterion() {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        EXPECT_LE(elapsed, budget_s_) << "criterion " << index_ << " over budget";
        const bool ok =
            !::testing::Test::HasFailure() && std::uncaught_exceptions() == 0;
        std::cout << "[CRITERION " << index_ << "] " << name_ << ": " << (ok ? "PASS" : "FAIL")
                  << " (" << elapsed << " s, budget " << budget_s_ << " s)" << std::endl;
    }

  private:
    int index_;
    std::string name_;
    double budget_s_;
    std::chrono::steady_clock::time_point start_;
};

// The default Scenario is the desk-scale preset: 10 x 10 m room at one
// state per square meter (S = 100), K = 4, L = 4, alpha = 2, 8 dB
// shadowing, 0 dB border SNR, M = 33 (M/S = 0.33), 200 drops.
Scenario desk_scenario() { return Scenario{}; }

std::vector<SchemeSpec> head_to_head() {
    return {scheme_by_name("ms_uniform"), scheme_by_name("proposed_multicast_aware")};
}

double mean_gap(const SchemeResult &uniform, const SchemeResult &proposed) {
    return mean_uncensored(uniform.totals) - mean_uncensored(proposed.totals);
}

// Bootstrap probability that gap_a >= gap_b, resampling one shared set
// of drop indices across all four per-drop sample vectors. The schemes
// and sweep points share user positions and fading per drop, so the
// pairing is exact.
double gap_shrink_confidence(const SchemeResult &ua, const SchemeResult &pa,
                             const SchemeResult &ub, const SchemeResult &pb,
                             std::uint64_t stream) {
    const std::size_t n = ua.totals.size();
    auto rng = make_rng(1, StreamTag::bootstrap, stream);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> rua(n), rpa(n), rub(n), rpb(n);
    const int resamples = 1000;
    int ge = 0;
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = pick(rng);
            rua[i] = ua.totals[j];
            rpa[i] = pa.totals[j];
            rub[i] = ub.totals[j];
            rpb[i] = pb.totals[j];
        }
        const double gap_a = mean_uncensored(rua) - mean_uncensored(rpa);
        const double gap_b = mean_uncensored(rub) - mean_uncensored(rpb);
        if (gap_a >= gap_b)
            ++ge;
    }
    return static_cast<double>(ge) / resamples;
}

} // namespace

TEST(Acceptance, C1_FiveStateAllocation) {
    Criterion c(1, "five-state allocation table", 1.0);
    const std::vector<double> want = {0.25, 0.5, 0.75, 0.5, 0.25};
    for (double phi : {0.5, 0.5e6}) {
        AllocationProblem p;
        p.rate_map = RateMap{{3000, 2000, 1000, 2000, 3000}};
        p.total_memory = 2.25;
        p.user_count = 4;
        p.tradeoff = phi;
        const MemoryAllocation alloc = allocate(p);
        ASSERT_EQ(alloc.m.size(), want.size());
        for (std::size_t s = 0; s < want.size(); ++s)
            EXPECT_NEAR(alloc.m[s], want[s], 1e-6) << "phi " << phi << " state " << s;
    }
}

TEST(Acceptance, C2_CompletenessSuite) {
    Criterion c(2, "delivery completeness suite", 120.0);
    // Exhaustive integer gains up to permutation symmetry.
    long cases = 0;
    for (int K = 1; K <= 5; ++K) {
        locache_test::for_each_multiset(K, K, [&](const std::vector<int> &t) {
            for (int alpha : {1, 2}) {
                const int t_hat = t[0];
                if (t_hat + alpha > K)
                    continue;
                const std::vector<double> gains(t.begin(), t.end());
                const CacheLayout layout = place_gains(gains, K);
                std::vector<int> states(static_cast<std::size_t>(K));
                for (int k = 0; k < K; ++k)
                    states[static_cast<std::size_t>(k)] = k;
                const auto demands = make_demands(states, layout);
                const TransmissionPlan plan =
                    build_multicast_plan(demands, layout, alpha, common_gain(demands));
                const CompletenessReport rep = verify_completeness(plan, demands, layout);
                ASSERT_TRUE(rep.complete) << "K=" << K << " alpha=" << alpha;
                for (int k = 0; k < K; ++k)
                    ASSERT_EQ(rep.delivered[static_cast<std::size_t>(k)],
                              demands[static_cast<std::size_t>(k)].missing());
                ++cases;
            }
        });
    }
    EXPECT_GT(cases, 300);

    // Random fractional gains, shared states allowed. The feasible antenna
    // range depends on the gain floor over occupied states, so demands are
    // built before alpha is drawn.
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        std::uniform_int_distribution<int> k_u(2, 6);
        const int K = k_u(rng);
        std::uniform_real_distribution<double> gain_u(0.0, K);
        std::vector<double> gains(static_cast<std::size_t>(K));
        for (double &g : gains)
            g = gain_u(rng);
        const CacheLayout layout = place_gains(gains, K);
        std::vector<int> states(static_cast<std::size_t>(K));
        std::uniform_int_distribution<int> s_u(0, K - 1);
        for (int &s : states)
            s = s_u(rng);
        const auto demands = make_demands(states, layout);
        const int t_hat = common_gain(demands);
        if (t_hat + 1 > K)
            continue;
        std::uniform_int_distribution<int> a_u(1, K - t_hat);
        const int alpha = a_u(rng);
        const TransmissionPlan plan = build_multicast_plan(demands, layout, alpha, t_hat);
        const CompletenessReport rep = verify_completeness(plan, demands, layout);
        ASSERT_TRUE(rep.complete) << "iteration " << it;
        for (const UserDemand &d : demands)
            ASSERT_EQ(rep.delivered[static_cast<std::size_t>(d.user)], d.missing())
                << "iteration " << it;
    }
}

TEST(Acceptance, C3_MixedGainGoldenSchedule) {
    Criterion c(3, "mixed-gain golden schedule", 1.0);
    const CacheLayout layout = place_gains({1, 2, 2, 1}, 4);
    const auto demands = make_demands({0, 1, 2, 3}, layout);
    const TransmissionPlan plan = build_multicast_plan(demands, layout, 2, common_gain(demands));
    ASSERT_EQ(plan.transmissions.size(), 4u);
    const Rational want_payload[] = {Rational(1, 8), Rational(1, 12), Rational(1, 12),
                                     Rational(1, 8)};
    const std::size_t want_chunks[] = {1, 2, 2, 1};
    const int want_factor[] = {2, 4, 4, 2};
    for (const Transmission &tx : plan.transmissions) {
        ASSERT_EQ(tx.codewords.size(), 3u);
        for (const Codeword &cw : tx.codewords)
            for (const DataTerm &term : cw.terms) {
                const std::size_t k = static_cast<std::size_t>(term.user);
                ASSERT_TRUE(term.payload == want_payload[k]) << "user " << term.user;
                ASSERT_EQ(term.segments.size(), want_chunks[k]);
                for (const SegmentId &seg : term.segments)
                    ASSERT_EQ(seg.seg_factor, want_factor[k]);
            }
    }
    const CompletenessReport rep = verify_completeness(plan, demands, layout);
    ASSERT_TRUE(rep.complete);
    EXPECT_EQ(rep.delivered[0], Rational(3, 4));
    EXPECT_EQ(rep.delivered[1], Rational(1, 2));
}

TEST(Acceptance, C4_PhantomLiftGolden) {
    Criterion c(4, "phantom lift golden plan", 1.0);
    const CacheLayout layout = place_gains({3, 3, 3, 1}, 4);
    const auto demands = make_demands({0, 1, 2, 3}, layout);
    const TransmissionPlan plan = build_phantom_plan(demands, layout, 2, 3);
    EXPECT_EQ(plan.phantom_excluded, bit(3));
    EXPECT_EQ(plan.common_gain, 3);
    ASSERT_EQ(plan.transmissions.size(), 2u);

    const Transmission &multi = plan.transmissions[0];
    EXPECT_EQ(multi.mode, PlanMode::phantom_multicast);
    ASSERT_EQ(multi.codewords.size(), 1u);
    // Phantom members stay in the set index; real recipients are users
    // 0..2 and each receives its full quarter in this one codeword.
    EXPECT_EQ(multi.codewords[0].target & ~plan.phantom_excluded, Mask{0b0111});
    ASSERT_EQ(multi.codewords[0].terms.size(), 3u);
    for (const DataTerm &term : multi.codewords[0].terms)
        EXPECT_TRUE(term.payload == Rational(1, 4));

    const Transmission &uni = plan.transmissions[1];
    EXPECT_EQ(uni.mode, PlanMode::unicast);
    EXPECT_EQ(uni.serving, bit(3));
    Rational unicast_total;
    for (const Codeword &cw : uni.codewords)
        for (const DataTerm &term : cw.terms) {
            EXPECT_EQ(term.user, 3);
            unicast_total += term.payload;
        }
    EXPECT_TRUE(unicast_total == Rational(3, 4));

    const CompletenessReport rep = verify_completeness(plan, demands, layout);
    ASSERT_TRUE(rep.complete);
    EXPECT_EQ(rep.delivered[0], Rational(1, 4));
    EXPECT_EQ(rep.delivered[3], Rational(3, 4));
}

TEST(Acceptance, C5_MemorySharingGolden) {
    Criterion c(5, "memory sharing golden case", 1.0);
    const CacheLayout layout = place_gains({1.2, 2, 2, 1}, 4);

    // The fractional state splits into parts of sizes 0.8 and 0.2.
    const StatePlacement &sp = layout.at(0);
    ASSERT_EQ(sp.parts.size(), 2u);
    EXPECT_EQ(sp.parts[0].part, Part::part1);
    EXPECT_EQ(sp.parts[0].gain, 1);
    EXPECT_NEAR(to_double(sp.parts[0].part_size), 0.8, 1e-12);
    EXPECT_EQ(sp.parts[1].part, Part::part2);
    EXPECT_EQ(sp.parts[1].gain, 2);
    EXPECT_NEAR(to_double(sp.parts[1].part_size), 0.2, 1e-12);

    const auto demands = make_demands({0, 1, 2, 3}, layout);
    const TransmissionPlan plan = build_multicast_plan(demands, layout, 2, common_gain(demands));

    // In the transmission serving {0, 1, 2}, the codeword for {0, 1}
    // carries user 0's content as three part-specific segments.
    const Transmission *serving012 = nullptr;
    for (const Transmission &tx : plan.transmissions)
        if (tx.serving == Mask{0b0111})
            serving012 = &tx;
    ASSERT_NE(serving012, nullptr);
    const Codeword *cw01 = nullptr;
    for (const Codeword &cw : serving012->codewords)
        if (cw.target == Mask{0b0011})
            cw01 = &cw;
    ASSERT_NE(cw01, nullptr);
    const DataTerm *user0 = nullptr;
    for (const DataTerm &term : cw01->terms)
        if (term.user == 0)
            user0 = &term;
    ASSERT_NE(user0, nullptr);
    ASSERT_EQ(user0->segments.size(), 3u);
    int part1_count = 0, part2_count = 0;
    for (const SegmentId &seg : user0->segments) {
        if (seg.part == Part::part1) {
            ++part1_count;
            EXPECT_EQ(seg.subset, bit(1));
        } else {
            ASSERT_EQ(seg.part, Part::part2);
            ++part2_count;
            EXPECT_TRUE(seg.subset == (bit(1) | bit(2)) || seg.subset == (bit(1) | bit(3)));
        }
    }
    EXPECT_EQ(part1_count, 1);
    EXPECT_EQ(part2_count, 2);

    const CompletenessReport rep = verify_completeness(plan, demands, layout);
    ASSERT_TRUE(rep.complete);
    EXPECT_EQ(rep.delivered[0], demands[0].missing());
    EXPECT_NEAR(to_double(rep.delivered[0]), 0.7, 1e-12);
}

TEST(Acceptance, C6_BeamformerCorrectness) {
    Criterion c(6, "beamformer correctness", 600.0);

    // (a) single served user: closed-form rate.
    const auto single = locache_test::make_instance(2, {0, 0}, 2, 1, 2.5, 1.0);
    ASSERT_EQ(single.problem.user_count(), 1);
    const double want =
        std::log2(1.0 + 2.5 * single.problem.h[0].squaredNorm());
    const BeamformerSolution sca1 = solve_wmm_sca(single.problem, SolverOptions{});
    EXPECT_NEAR(sca1.rate[0], want, 1e-4 * want);

    // (b) objective trace never decreases on 100 seeded instances.
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto small = locache_test::make_instance(seed, {1, 1, 1, 1}, 2, 2, 4.0, 1.0);
        const auto large = locache_test::make_instance(seed, {2, 2, 2, 2}, 4, 2, 4.0, 1.0);
        for (const auto *inst : {&small, &large}) {
            const BeamformerSolution sol = solve_wmm_sca(inst->problem, SolverOptions{});
            for (std::size_t i = 1; i < sol.trace.size(); ++i)
                ASSERT_GE(sol.trace[i], sol.trace[i - 1] - 1e-9) << "seed " << seed;
            ++checked;
        }
    }
    ASSERT_EQ(checked, 100);

    // (c) the SCA result never falls below its initializers.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = locache_test::make_instance(seed, {1, 1, 1, 1}, 4, 2, 4.0, 1.0);
        const BeamformerSolution zf = solve_zero_forcing(inst.problem);
        const BeamformerSolution sca = solve_wmm_sca(inst.problem, SolverOptions{});
        EXPECT_GE(sca.objective, zf.objective - 1e-6) << "seed " << seed;
    }

    // (d) within 2% of a 1e5-sample randomized-search oracle on ten
    // L = 2 instances serving three users.
    for (std::uint64_t seed = 31; seed <= 40; ++seed) {
        const auto inst = locache_test::make_instance(seed, {1, 1, 1, 1}, 2, 2, 4.0, 1.0);
        ASSERT_EQ(inst.problem.user_count(), 3);
        const double oracle = locache_test::random_beam_oracle(inst.problem, 100000, seed);
        const BeamformerSolution sca = solve_wmm_sca(inst.problem, SolverOptions{});
        EXPECT_GE(sca.objective, 0.98 * oracle) << "seed " << seed;
    }
}

TEST(Acceptance, C7_TimeIdentities) {
    Criterion c(7, "delivery time identities", 1.0);
    // Summed per-transmission times match the closed form exactly when
    // each user keeps one rate.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> rate_u(200.0, 5000.0);
    int cases = 0;
    for (int K = 2; K <= 4; ++K) {
        locache_test::for_each_multiset(K, K - 1, [&](const std::vector<int> &t) {
            const int alpha = 1;
            if (t[0] + alpha > K)
                return;
            const std::vector<double> gains(t.begin(), t.end());
            const CacheLayout layout = place_gains(gains, K);
            std::vector<int> states(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k)
                states[static_cast<std::size_t>(k)] = k;
            const auto demands = make_demands(states, layout);
            const TransmissionPlan plan =
                build_multicast_plan(demands, layout, alpha, common_gain(demands));
            std::vector<double> rates(static_cast<std::size_t>(K));
            for (double &r : rates)
                r = rate_u(rng);
            std::vector<double> missing(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k)
                missing[static_cast<std::size_t>(k)] =
                    to_double(demands[static_cast<std::size_t>(k)].missing());
            double summed = 0;
            for (const Transmission &tx : plan.transmissions) {
                double worst = 0;
                for (const Codeword &cw : tx.codewords)
                    for (const DataTerm &term : cw.terms)
                        worst = std::max(worst,
                                         to_double(term.payload) /
                                             rates[static_cast<std::size_t>(term.user)]);
                summed += worst;
            }
            const double closed = eq18_total_time(missing, rates, t[0], alpha);
            ASSERT_NEAR(summed, closed, 1e-12 * (1 + std::abs(closed)));
            ++cases;
        });
    }
    EXPECT_GT(cases, 20);

    // Allocation-level estimate on the five-state table.
    AllocationProblem p;
    p.rate_map = RateMap{{3000, 2000, 1000, 2000, 3000}};
    p.total_memory = 2.25;
    p.user_count = 4;
    p.tradeoff = 0.5;
    const MemoryAllocation alloc = allocate(p);
    EXPECT_NEAR(approx_total_time(alloc, p.rate_map, 4, 2), 3.3333333333e-4, 1e-9);
}

TEST(Acceptance, C8_DeskScaleDispersion) {
    Criterion c(8, "desk-scale dispersion ordering", 900.0);
    const CdfResult res = run_cdf_experiment(desk_scenario(), head_to_head());
    const SchemeResult &uniform = res.scheme("ms_uniform");
    const SchemeResult &proposed = res.scheme("proposed_multicast_aware");
    ASSERT_EQ(uniform.totals.size(), 200u);
    ASSERT_EQ(proposed.totals.size(), 200u);

    EXPECT_GE(uniform.p95, proposed.p95);
    EXPECT_GE(uniform.iqr, proposed.iqr);

    const auto p95_stat = [](const std::vector<double> &v) {
        return percentile_nearest_rank(v, 95.0);
    };
    const auto iqr_stat = [](const std::vector<double> &v) { return interquartile_range(v); };
    auto rng = make_rng(1, StreamTag::bootstrap, 8);
    const BootstrapSummary b95 =
        paired_bootstrap(uniform.totals, proposed.totals, p95_stat, 1000, rng);
    EXPECT_GE(b95.prob_ge_zero, 0.95) << "p95 ordering not confident";
    const BootstrapSummary biqr =
        paired_bootstrap(uniform.totals, proposed.totals, iqr_stat, 1000, rng);
    EXPECT_GE(biqr.prob_ge_zero, 0.95) << "IQR ordering not confident";
}

TEST(Acceptance, C9_DeskScaleTrends) {
    Criterion c(9, "desk-scale trend checks", 1200.0);
    const Scenario base = desk_scenario();
    const std::vector<SchemeSpec> schemes = head_to_head();

    // (a) dispersion of the rate map widens the gap: sigma 12 vs 2.
    const SweepResult sigma =
        run_sweep(base, schemes, SweepParameter::shadowing_std, {2.0, 12.0});
    const CdfResult &s2 = sigma.points[0].result;
    const CdfResult &s12 = sigma.points[1].result;
    const double gap2 = mean_gap(s2.scheme("ms_uniform"), s2.scheme("proposed_multicast_aware"));
    const double gap12 =
        mean_gap(s12.scheme("ms_uniform"), s12.scheme("proposed_multicast_aware"));
    EXPECT_GT(gap12, gap2);
    const double conf_sigma = gap_shrink_confidence(
        s12.scheme("ms_uniform"), s12.scheme("proposed_multicast_aware"), s2.scheme("ms_uniform"),
        s2.scheme("proposed_multicast_aware"), 91);
    EXPECT_GE(conf_sigma, 0.95) << "shadowing trend not confident";

    // (b) more transmit power shrinks the gap monotonically.
    const SweepResult snr =
        run_sweep(base, schemes, SweepParameter::border_snr, {-5.0, 5.0, 15.0});
    std::vector<double> gaps;
    for (const SweepPoint &pt : snr.points)
        gaps.push_back(mean_gap(pt.result.scheme("ms_uniform"),
                                pt.result.scheme("proposed_multicast_aware")));
    EXPECT_GT(gaps[0], gaps[1]);
    EXPECT_GT(gaps[1], gaps[2]);
    const double conf_lo = gap_shrink_confidence(
        snr.points[0].result.scheme("ms_uniform"),
        snr.points[0].result.scheme("proposed_multicast_aware"),
        snr.points[1].result.scheme("ms_uniform"),
        snr.points[1].result.scheme("proposed_multicast_aware"), 92);
    const double conf_hi = gap_shrink_confidence(
        snr.points[1].result.scheme("ms_uniform"),
        snr.points[1].result.scheme("proposed_multicast_aware"),
        snr.points[2].result.scheme("ms_uniform"),
        snr.points[2].result.scheme("proposed_multicast_aware"), 93);
    EXPECT_GE(conf_lo, 0.95) << "border SNR trend (-5 vs 5) not confident";
    EXPECT_GE(conf_hi, 0.95) << "border SNR trend (5 vs 15) not confident";
}
