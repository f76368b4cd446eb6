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

#ifndef LOCACHE_DELIVERY_HPP
#define LOCACHE_DELIVERY_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "locache/combinatorics.hpp"
#include "locache/common.hpp"
#include "locache/placement.hpp"
#include "locache/rational.hpp"

namespace locache {

// One user's request: the file of the state it currently occupies.
struct UserDemand {
    int user = 0;
    int state = 0;
    Rational gain;   // t_k = t(s_k), snapped
    Rational cached; // m_k = t_k / K

    Rational missing() const { return Rational(1) - cached; }
};

inline std::vector<UserDemand> make_demands(const std::vector<int> &user_states,
                                            const CacheLayout &layout) {
    std::vector<UserDemand> out;
    out.reserve(user_states.size());
    for (std::size_t k = 0; k < user_states.size(); ++k) {
        const StatePlacement &sp = layout.at(user_states[k]);
        UserDemand d;
        d.user = static_cast<int>(k);
        d.state = user_states[k];
        d.gain = sp.gain;
        d.cached = sp.gain / layout.user_count;
        out.push_back(d);
    }
    return out;
}

// One chunk of one missing subfile, addressed to one user. A subfile is
// cut into seg_factor equal chunks; the plan sends each chunk once.
struct SegmentId {
    int user = 0;
    int state = 0;
    Part part = Part::whole;
    Mask subset = 0; // V, never containing user
    int chunk = 0;
    int seg_factor = 1;
    Rational size;
};

// Data nested for one user inside one codeword.
struct DataTerm {
    int user = 0;
    std::vector<SegmentId> segments;
    Rational payload; // sum of segment sizes
};

struct Codeword {
    Mask target = 0; // U
    std::vector<DataTerm> terms;
};

enum class PlanMode { multicast, phantom_multicast, unicast, topup_unicast };

inline const char *plan_mode_name(PlanMode m) {
    switch (m) {
    case PlanMode::multicast: return "multicast";
    case PlanMode::phantom_multicast: return "phantom-multicast";
    case PlanMode::unicast: return "unicast";
    case PlanMode::topup_unicast: return "topup-unicast";
    }
    return "?";
}

struct Transmission {
    Mask serving = 0; // K_bar; includes phantom-excluded members if any
    PlanMode mode = PlanMode::multicast;
    std::vector<Codeword> codewords;
};

struct TransmissionPlan {
    int user_count = 0;
    int alpha = 1;
    int common_gain = 0;       // t_hat, or t_bar for phantom plans
    Mask phantom_excluded = 0; // K_p
    std::vector<Transmission> transmissions;
};

// Common global caching gain: floor of the smallest per-user gain.
inline int common_gain(const std::vector<UserDemand> &demands) {
    if (demands.empty())
        throw std::domain_error("common_gain: no demands");
    int t_hat = std::numeric_limits<int>::max();
    for (const UserDemand &d : demands)
        t_hat = std::min(t_hat, floor_int(d.gain));
    return t_hat;
}

namespace detail {

// Shape of the nested enumeration shared by the multicast and phantom
// builders. Serving sets and codewords are capped at the real user count
// so a target gain above K still yields one all-user transmission.
struct PlanShape {
    int K = 0;
    int alpha = 1;
    int gain = 0;       // t_hat (multicast) or t_bar (phantom)
    Mask phantoms = 0;  // K_p; members never receive data terms
    int serve_size = 0; // min(gain + alpha, K)
    int cw_size = 0;    // min(gain + 1, serve_size)

    static PlanShape make(int K, int alpha, int gain, Mask phantoms) {
        PlanShape sh;
        sh.K = K;
        sh.alpha = alpha;
        sh.gain = gain;
        sh.phantoms = phantoms;
        sh.serve_size = std::min(gain + alpha, K);
        sh.cw_size = std::min(gain + 1, sh.serve_size);
        return sh;
    }
};

// Walks every (serving set, codeword, user, part, subset) consumption
// context in one fixed lexicographic order. Both dry-run counting and
// plan emission ride on this single walk so their orders always agree.
template <typename F>
inline void for_each_consumption(const PlanShape &shape, const CacheLayout &layout,
                                 const std::vector<UserDemand> &demands, F &&visit) {
    const Mask full = (bit(shape.K)) - 1;
    for_each_subset_mask(shape.K, shape.serve_size, [&](Mask serve) {
        if (shape.phantoms != 0 && popcount(serve & ~shape.phantoms) < shape.alpha)
            return; // too few real users to exploit the spatial streams
        for_each_subset_of(serve, shape.cw_size, [&](Mask cw) {
            for (int k : elements_of(cw & ~shape.phantoms)) {
                const UserDemand &d = demands[static_cast<std::size_t>(k)];
                const StatePlacement &sp = layout.at(d.state);
                const Mask required = cw & ~bit(k);
                const Mask pool = full & ~cw;
                for (const auto &pl : sp.parts) {
                    const int extra = pl.gain - popcount(required);
                    if (extra < 0 || extra > popcount(pool))
                        continue; // no cacheable subset of this size fits
                    for_each_subset_of(pool, extra, [&](Mask add) {
                        visit(serve, cw, k, pl, required | add);
                    });
                }
            }
        });
    });
}

using ChunkKey = std::tuple<int, int, Mask>; // user, part, subset

// Emits the transmissions for one enumeration shape. Chunk counts per
// missing subfile are measured by a dry run, then the same walk assigns
// chunk indices with a per-subfile cursor, so every touched subfile is
// fully consumed and no chunk repeats.
inline std::vector<Transmission> emit_transmissions(const PlanShape &shape,
                                                    const CacheLayout &layout,
                                                    const std::vector<UserDemand> &demands,
                                                    PlanMode mode) {
    std::map<ChunkKey, std::int64_t> factor;
    for_each_consumption(shape, layout, demands,
                         [&](Mask, Mask, int k, const StatePlacement::PartLayout &pl, Mask V) {
                             factor[ChunkKey{k, static_cast<int>(pl.part), V}] += 1;
                         });

    std::vector<Transmission> out;
    std::map<ChunkKey, std::int64_t> cursor;
    Mask cur_serve = 0, cur_cw = 0;
    int cur_user = -1;
    bool open = false;
    for_each_consumption(shape, layout, demands,
                         [&](Mask serve, Mask cw, int k, const StatePlacement::PartLayout &pl, Mask V) {
                             if (!open || serve != cur_serve) {
                                 Transmission tx;
                                 tx.serving = serve;
                                 tx.mode = mode;
                                 out.push_back(std::move(tx));
                                 cur_serve = serve;
                                 cur_cw = 0;
                                 cur_user = -1;
                                 open = true;
                             }
                             Transmission &tx = out.back();
                             if (tx.codewords.empty() || cw != cur_cw) {
                                 tx.codewords.push_back(Codeword{cw, {}});
                                 cur_cw = cw;
                                 cur_user = -1;
                             }
                             Codeword &cword = tx.codewords.back();
                             if (cword.terms.empty() || k != cur_user) {
                                 cword.terms.push_back(DataTerm{k, {}, Rational(0)});
                                 cur_user = k;
                             }
                             DataTerm &term = cword.terms.back();
                             const ChunkKey key{k, static_cast<int>(pl.part), V};
                             const std::int64_t f = factor.at(key);
                             SegmentId seg;
                             seg.user = k;
                             seg.state = demands[static_cast<std::size_t>(k)].state;
                             seg.part = pl.part;
                             seg.subset = V;
                             seg.chunk = static_cast<int>(cursor[key]++);
                             seg.seg_factor = static_cast<int>(f);
                             seg.size = pl.subfile_size / f;
                             term.payload += seg.size;
                             term.segments.push_back(std::move(seg));
                         });
    return out;
}

inline void check_demands(const std::vector<UserDemand> &demands, const CacheLayout &layout) {
    if (static_cast<int>(demands.size()) != layout.user_count)
        throw std::domain_error("delivery: need exactly one demand per user");
    for (std::size_t k = 0; k < demands.size(); ++k)
        if (demands[k].user != static_cast<int>(k))
            throw std::domain_error("delivery: demands must be indexed by user");
}

// Closed-form chunk count for the strict nested multicast schedule.
inline std::int64_t expected_seg_factor(int K, int alpha, int t_hat, int part_gain) {
    return binomial(part_gain, t_hat) * binomial(K - t_hat - 1, alpha - 1);
}

} // namespace detail

// Nested multicast schedule: one transmission per serving set of size
// t_hat + alpha, codewords per subset of size t_hat + 1, each nesting
// chunked missing subfiles that all other codeword members have cached.
inline TransmissionPlan build_multicast_plan(const std::vector<UserDemand> &demands,
                                             const CacheLayout &layout, int alpha, int t_hat) {
    detail::check_demands(demands, layout);
    const int K = layout.user_count;
    if (alpha < 1)
        throw std::domain_error("build_multicast_plan: alpha must be >= 1");
    if (t_hat < 0)
        throw std::domain_error("build_multicast_plan: negative common gain");
    if (t_hat + alpha > K)
        throw schedule_error("multicast schedule needs t_hat + alpha <= K; "
                             "use the phantom or unicast builder");
    TransmissionPlan plan;
    plan.user_count = K;
    plan.alpha = alpha;
    plan.common_gain = t_hat;
    const auto shape = detail::PlanShape::make(K, alpha, t_hat, 0);
    plan.transmissions = detail::emit_transmissions(shape, layout, demands, PlanMode::multicast);
    return plan;
}

// Multi-user unicast: batches of up to alpha users, one single-user
// codeword each carrying the user's whole missing content. Restricted to
// `only` when nonzero. Fully cached users are omitted.
inline TransmissionPlan build_unicast_plan(const std::vector<UserDemand> &demands,
                                           const CacheLayout &layout, int alpha,
                                           Mask only = ~Mask{0}) {
    detail::check_demands(demands, layout);
    if (alpha < 1)
        throw std::domain_error("build_unicast_plan: alpha must be >= 1");
    TransmissionPlan plan;
    plan.user_count = layout.user_count;
    plan.alpha = alpha;
    plan.common_gain = 0;
    Transmission tx;
    tx.mode = PlanMode::unicast;
    for (const UserDemand &d : demands) {
        if (!(only & bit(d.user)))
            continue;
        auto missing = missing_subfiles(layout, d.user, d.state);
        if (missing.empty())
            continue;
        Codeword cw;
        cw.target = bit(d.user);
        DataTerm term;
        term.user = d.user;
        for (const SubfileId &sf : missing) {
            SegmentId seg;
            seg.user = d.user;
            seg.state = sf.state;
            seg.part = sf.part;
            seg.subset = sf.subset;
            seg.chunk = 0;
            seg.seg_factor = 1;
            seg.size = sf.size;
            term.payload += seg.size;
            term.segments.push_back(std::move(seg));
        }
        cw.terms.push_back(std::move(term));
        tx.serving |= bit(d.user);
        tx.codewords.push_back(std::move(cw));
        if (static_cast<int>(tx.codewords.size()) == alpha) {
            plan.transmissions.push_back(std::move(tx));
            tx = Transmission{};
            tx.mode = PlanMode::unicast;
        }
    }
    if (!tx.codewords.empty())
        plan.transmissions.push_back(std::move(tx));
    return plan;
}

// Per-user delivery accounting plus the exact chunks still owed.
struct CompletenessReport {
    std::vector<Rational> delivered;             // per user, data units
    std::vector<std::vector<SegmentId>> residual; // per user, undelivered chunks
    bool complete = true;

    Rational residual_size(int k) const {
        Rational total = 0;
        for (const SegmentId &seg : residual[static_cast<std::size_t>(k)])
            total += seg.size;
        return total;
    }
};

// Replays a plan against the layout: rejects duplicate or malformed
// segments, credits each user's unique chunks, and reports what is still
// missing. Use assert_complete for plans that must deliver everything.
inline CompletenessReport verify_completeness(const TransmissionPlan &plan,
                                              const std::vector<UserDemand> &demands,
                                              const CacheLayout &layout) {
    detail::check_demands(demands, layout);
    const int K = layout.user_count;

    // user, part, subset -> seg_factor and delivered chunk set
    struct SubfileTally {
        int seg_factor = 0;
        std::vector<bool> seen;
    };
    std::map<detail::ChunkKey, SubfileTally> tally;

    for (const Transmission &tx : plan.transmissions) {
        for (const Codeword &cw : tx.codewords) {
            if ((cw.target & ~tx.serving) != 0)
                throw plan_invariant_error("codeword targets outside its serving set");
            for (const DataTerm &term : cw.terms) {
                const int k = term.user;
                if (k < 0 || k >= K || !(cw.target & bit(k)))
                    throw plan_invariant_error("data term user not in codeword target");
                const UserDemand &d = demands[static_cast<std::size_t>(k)];
                const StatePlacement &sp = layout.at(d.state);
                Rational paysum = 0;
                for (const SegmentId &seg : term.segments) {
                    if (seg.user != k || seg.state != d.state)
                        throw plan_invariant_error("segment addressed to the wrong demand");
                    if (seg.subset & bit(k))
                        throw plan_invariant_error("segment subset contains its consumer");
                    const Mask others = cw.target & ~bit(k) & ~plan.phantom_excluded;
                    if ((others & ~seg.subset) != 0)
                        throw plan_invariant_error("segment not cached by a codeword member");
                    const StatePlacement::PartLayout *pl = nullptr;
                    for (const auto &cand : sp.parts)
                        if (cand.part == seg.part)
                            pl = &cand;
                    if (pl == nullptr || popcount(seg.subset) != pl->gain)
                        throw plan_invariant_error("segment does not match the placement");
                    if (seg.seg_factor < 1 || seg.chunk < 0 || seg.chunk >= seg.seg_factor)
                        throw plan_invariant_error("segment chunk index out of range");
                    if (seg.size * seg.seg_factor != pl->subfile_size)
                        throw plan_invariant_error("segment size disagrees with its chunking");
                    auto &t = tally[detail::ChunkKey{k, static_cast<int>(seg.part), seg.subset}];
                    if (t.seg_factor == 0) {
                        t.seg_factor = seg.seg_factor;
                        t.seen.assign(static_cast<std::size_t>(seg.seg_factor), false);
                    } else if (t.seg_factor != seg.seg_factor) {
                        throw plan_invariant_error("subfile chunked with two different factors");
                    }
                    if (t.seen[static_cast<std::size_t>(seg.chunk)])
                        throw plan_invariant_error("duplicate segment in plan");
                    t.seen[static_cast<std::size_t>(seg.chunk)] = true;
                    paysum += seg.size;
                }
                if (paysum != term.payload)
                    throw plan_invariant_error("data term payload disagrees with its segments");
            }
        }
    }

    CompletenessReport report;
    report.delivered.assign(static_cast<std::size_t>(K), Rational(0));
    report.residual.assign(static_cast<std::size_t>(K), {});
    for (const UserDemand &d : demands) {
        const int k = d.user;
        for (const SubfileId &sf : missing_subfiles(layout, k, d.state)) {
            auto it = tally.find(detail::ChunkKey{k, static_cast<int>(sf.part), sf.subset});
            if (it == tally.end()) {
                SegmentId seg;
                seg.user = k;
                seg.state = sf.state;
                seg.part = sf.part;
                seg.subset = sf.subset;
                seg.chunk = 0;
                seg.seg_factor = 1;
                seg.size = sf.size;
                report.residual[static_cast<std::size_t>(k)].push_back(std::move(seg));
                report.complete = false;
                continue;
            }
            const SubfileTally &t = it->second;
            for (int q = 0; q < t.seg_factor; ++q) {
                const Rational chunk_size = sf.size / t.seg_factor;
                if (t.seen[static_cast<std::size_t>(q)]) {
                    report.delivered[static_cast<std::size_t>(k)] += chunk_size;
                } else {
                    SegmentId seg;
                    seg.user = k;
                    seg.state = sf.state;
                    seg.part = sf.part;
                    seg.subset = sf.subset;
                    seg.chunk = q;
                    seg.seg_factor = t.seg_factor;
                    seg.size = chunk_size;
                    report.residual[static_cast<std::size_t>(k)].push_back(std::move(seg));
                    report.complete = false;
                }
            }
        }
    }
    return report;
}

// Strict form for pure nested-multicast plans: demands every user's full
// missing content, delivered exactly.
inline CompletenessReport assert_complete(const TransmissionPlan &plan,
                                          const std::vector<UserDemand> &demands,
                                          const CacheLayout &layout) {
    CompletenessReport report = verify_completeness(plan, demands, layout);
    for (const UserDemand &d : demands) {
        if (report.delivered[static_cast<std::size_t>(d.user)] != d.missing())
            throw plan_invariant_error("plan does not deliver a user's full missing content");
    }
    return report;
}

// Sends leftover chunks from a completeness report as unicast batches of
// up to alpha users.
inline TransmissionPlan topup_unicast(const CompletenessReport &report,
                                      const std::vector<UserDemand> &demands,
                                      const CacheLayout &layout, int alpha) {
    detail::check_demands(demands, layout);
    if (alpha < 1)
        throw std::domain_error("topup_unicast: alpha must be >= 1");
    TransmissionPlan plan;
    plan.user_count = layout.user_count;
    plan.alpha = alpha;
    plan.common_gain = 0;
    Transmission tx;
    tx.mode = PlanMode::topup_unicast;
    for (int k = 0; k < layout.user_count; ++k) {
        const auto &segs = report.residual[static_cast<std::size_t>(k)];
        if (segs.empty())
            continue;
        Codeword cw;
        cw.target = bit(k);
        DataTerm term;
        term.user = k;
        for (const SegmentId &seg : segs) {
            term.payload += seg.size;
            term.segments.push_back(seg);
        }
        cw.terms.push_back(std::move(term));
        tx.serving |= bit(k);
        tx.codewords.push_back(std::move(cw));
        if (static_cast<int>(tx.codewords.size()) == alpha) {
            plan.transmissions.push_back(std::move(tx));
            tx = Transmission{};
            tx.mode = PlanMode::topup_unicast;
        }
    }
    if (!tx.codewords.empty())
        plan.transmissions.push_back(std::move(tx));
    return plan;
}

// Phantom-user schedule: when the lowest-gain users hold the common gain
// below t_target, they are cut from the combinatorial design (kept as
// set members only) and served by unicast; any shortfall found by the
// verifier is topped up. Without the gain shortfall or with too few
// remaining users the plain nested schedule is emitted, capped at the
// user count when the target gain is out of range.
inline TransmissionPlan build_phantom_plan(const std::vector<UserDemand> &demands,
                                           const CacheLayout &layout, int alpha,
                                           int t_target) {
    detail::check_demands(demands, layout);
    const int K = layout.user_count;
    if (alpha < 1)
        throw std::domain_error("build_phantom_plan: alpha must be >= 1");
    if (t_target < 0)
        throw std::domain_error("build_phantom_plan: negative target gain");
    const int t_hat = common_gain(demands);

    Mask phantoms = 0;
    int gain = t_hat;
    if (t_hat < t_target) {
        Mask low = 0;
        for (const UserDemand &d : demands)
            if (floor_int(d.gain) == t_hat)
                low |= bit(d.user);
        const int remaining = K - popcount(low);
        if (remaining >= t_hat + alpha && remaining > 0) {
            phantoms = low;
            gain = std::numeric_limits<int>::max();
            for (const UserDemand &d : demands)
                if (!(low & bit(d.user)))
                    gain = std::min(gain, floor_int(d.gain));
        }
    }

    TransmissionPlan plan;
    plan.user_count = K;
    plan.alpha = alpha;
    plan.common_gain = gain;
    plan.phantom_excluded = phantoms;
    const auto shape = detail::PlanShape::make(K, alpha, gain, phantoms);
    const PlanMode mode = phantoms ? PlanMode::phantom_multicast : PlanMode::multicast;
    plan.transmissions = detail::emit_transmissions(shape, layout, demands, mode);

    if (phantoms != 0) {
        TransmissionPlan uni = build_unicast_plan(demands, layout, alpha, phantoms);
        for (auto &tx : uni.transmissions)
            plan.transmissions.push_back(std::move(tx));
    }
    CompletenessReport report = verify_completeness(plan, demands, layout);
    if (!report.complete) {
        TransmissionPlan topup = topup_unicast(report, demands, layout, alpha);
        for (auto &tx : topup.transmissions)
            plan.transmissions.push_back(std::move(tx));
    }
    return plan;
}

} // namespace locache

#endif
