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

#ifndef LOCACHE_IO_HPP
#define LOCACHE_IO_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "locache/config.hpp"
#include "locache/experiments.hpp"

namespace locache {

using Json = nlohmann::json;

// ---------------------------------------------------------------------
// Provenance
// ---------------------------------------------------------------------

// Comment header for CSV outputs: tool version plus the resolved
// configuration, one key per line.
inline void write_provenance(std::ostream &out, const std::string &resolved_config) {
    out << "# locache " << version() << "\n";
    std::istringstream lines(resolved_config);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty())
            out << "# " << line << "\n";
}

inline Json provenance_json(const std::string &resolved_config) {
    Json j;
    j["tool"] = "locache";
    j["tool_version"] = version();
    Json cfg = Json::array();
    std::istringstream lines(resolved_config);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty())
            cfg.push_back(line);
    j["config"] = cfg;
    return j;
}

// ---------------------------------------------------------------------
// Plan serialization
// ---------------------------------------------------------------------

inline Part part_from_name(const std::string &name) {
    if (name == "whole")
        return Part::whole;
    if (name == "part1")
        return Part::part1;
    if (name == "part2")
        return Part::part2;
    throw config_error("unknown part name: " + name);
}

inline PlanMode plan_mode_from_name(const std::string &name) {
    if (name == "multicast")
        return PlanMode::multicast;
    if (name == "phantom-multicast")
        return PlanMode::phantom_multicast;
    if (name == "unicast")
        return PlanMode::unicast;
    if (name == "topup-unicast")
        return PlanMode::topup_unicast;
    throw config_error("unknown plan mode: " + name);
}

namespace detail {

inline Json mask_to_json(Mask m) { return Json(elements_of(m)); }

inline Mask mask_from_json(const Json &j) {
    Mask m = 0;
    for (const auto &e : j)
        m |= bit(e.get<int>());
    return m;
}

inline Rational rational_from_string(const std::string &s) {
    try {
        return Rational(s);
    } catch (const std::exception &) {
        throw config_error("malformed rational: " + s);
    }
}

} // namespace detail

// Canonical JSON encoding of a plan. Masks become sorted index arrays
// and exact rationals become "num/den" strings, so the encoding is
// deterministic and survives a round trip bit for bit.
inline Json plan_to_json(const TransmissionPlan &plan) {
    Json j;
    j["user_count"] = plan.user_count;
    j["alpha"] = plan.alpha;
    j["common_gain"] = plan.common_gain;
    j["phantom_excluded"] = detail::mask_to_json(plan.phantom_excluded);
    Json txs = Json::array();
    for (const Transmission &tx : plan.transmissions) {
        Json jt;
        jt["serving"] = detail::mask_to_json(tx.serving);
        jt["mode"] = plan_mode_name(tx.mode);
        Json cws = Json::array();
        for (const Codeword &cw : tx.codewords) {
            Json jc;
            jc["target"] = detail::mask_to_json(cw.target);
            Json terms = Json::array();
            for (const DataTerm &term : cw.terms) {
                Json jd;
                jd["user"] = term.user;
                jd["payload"] = to_string(term.payload);
                Json segs = Json::array();
                for (const SegmentId &seg : term.segments) {
                    Json js;
                    js["user"] = seg.user;
                    js["state"] = seg.state;
                    js["part"] = part_name(seg.part);
                    js["subset"] = detail::mask_to_json(seg.subset);
                    js["chunk"] = seg.chunk;
                    js["seg_factor"] = seg.seg_factor;
                    js["size"] = to_string(seg.size);
                    segs.push_back(std::move(js));
                }
                jd["segments"] = std::move(segs);
                terms.push_back(std::move(jd));
            }
            jc["terms"] = std::move(terms);
            cws.push_back(std::move(jc));
        }
        jt["codewords"] = std::move(cws);
        txs.push_back(std::move(jt));
    }
    j["transmissions"] = std::move(txs);
    return j;
}

inline TransmissionPlan plan_from_json(const Json &j) {
    TransmissionPlan plan;
    plan.user_count = j.at("user_count").get<int>();
    plan.alpha = j.at("alpha").get<int>();
    plan.common_gain = j.at("common_gain").get<int>();
    plan.phantom_excluded = detail::mask_from_json(j.at("phantom_excluded"));
    for (const Json &jt : j.at("transmissions")) {
        Transmission tx;
        tx.serving = detail::mask_from_json(jt.at("serving"));
        tx.mode = plan_mode_from_name(jt.at("mode").get<std::string>());
        for (const Json &jc : jt.at("codewords")) {
            Codeword cw;
            cw.target = detail::mask_from_json(jc.at("target"));
            for (const Json &jd : jc.at("terms")) {
                DataTerm term;
                term.user = jd.at("user").get<int>();
                term.payload = detail::rational_from_string(jd.at("payload").get<std::string>());
                for (const Json &js : jd.at("segments")) {
                    SegmentId seg;
                    seg.user = js.at("user").get<int>();
                    seg.state = js.at("state").get<int>();
                    seg.part = part_from_name(js.at("part").get<std::string>());
                    seg.subset = detail::mask_from_json(js.at("subset"));
                    seg.chunk = js.at("chunk").get<int>();
                    seg.seg_factor = js.at("seg_factor").get<int>();
                    seg.size = detail::rational_from_string(js.at("size").get<std::string>());
                    term.segments.push_back(std::move(seg));
                }
                cw.terms.push_back(std::move(term));
            }
            tx.codewords.push_back(std::move(cw));
        }
        plan.transmissions.push_back(std::move(tx));
    }
    return plan;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Stable identity of a plan's semantic content. nlohmann::json keeps
// object keys sorted, so dump() is canonical.
inline std::uint64_t plan_hash(const TransmissionPlan &plan) {
    return fnv1a64(plan_to_json(plan).dump());
}

inline std::string hash_string(std::uint64_t h) {
    std::ostringstream out;
    out << "0x" << std::hex << std::setfill('0') << std::setw(16) << h;
    return out.str();
}

// ---------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------

namespace detail {

inline void write_number(std::ostream &out, double x) {
    if (std::isinf(x)) {
        out << (x > 0 ? "inf" : "-inf");
        return;
    }
    out << x;
}

} // namespace detail

inline void write_rate_map_csv(std::ostream &out, const StateGrid &grid, const RateMap &map,
                               const std::string &resolved_config) {
    write_provenance(out, resolved_config);
    out.precision(17);
    out << "state,x,y,distance,shadowing_db,rate\n";
    for (int s = 0; s < grid.size(); ++s) {
        const State &st = grid.states[static_cast<std::size_t>(s)];
        out << s << ',' << st.cx << ',' << st.cy << ',' << st.distance << ',' << st.shadowing_db
            << ',' << map.r[static_cast<std::size_t>(s)] << "\n";
    }
}

inline void write_allocation_csv(std::ostream &out, const MemoryAllocation &alloc,
                                 const std::string &resolved_config) {
    write_provenance(out, resolved_config);
    out.precision(17);
    out << "state,m,gain\n";
    for (std::size_t s = 0; s < alloc.m.size(); ++s)
        out << s << ',' << alloc.m[s] << ',' << alloc.gain(static_cast<int>(s)) << "\n";
}

inline void write_drops_csv(std::ostream &out, const CdfResult &result,
                            const std::string &resolved_config) {
    write_provenance(out, resolved_config);
    out.precision(17);
    out << "scheme,drop,total_time,censored\n";
    for (const SchemeResult &sr : result.schemes)
        for (std::size_t d = 0; d < sr.totals.size(); ++d) {
            out << sr.scheme << ',' << d << ',';
            detail::write_number(out, sr.totals[d]);
            out << ',' << (std::isinf(sr.totals[d]) ? 1 : 0) << "\n";
        }
}

inline void write_summary_csv(std::ostream &out, const CdfResult &result,
                              const std::string &resolved_config) {
    write_provenance(out, resolved_config);
    out.precision(17);
    out << "scheme,drops,censored,mean,p50,p95,iqr\n";
    for (const SchemeResult &sr : result.schemes) {
        out << sr.scheme << ',' << sr.totals.size() << ',' << sr.censored << ',';
        detail::write_number(out, sr.mean);
        out << ',';
        detail::write_number(out, sr.p50);
        out << ',';
        detail::write_number(out, sr.p95);
        out << ',';
        detail::write_number(out, sr.iqr);
        out << "\n";
    }
}

inline void write_sweep_csv(std::ostream &out, const SweepResult &sweep,
                            const std::string &resolved_config) {
    write_provenance(out, resolved_config);
    out.precision(17);
    out << "parameter,value,scheme,drops,censored,mean,p50,p95,iqr\n";
    for (const SweepPoint &pt : sweep.points)
        for (const SchemeResult &sr : pt.result.schemes) {
            out << sweep_parameter_name(sweep.parameter) << ',' << pt.value << ',' << sr.scheme
                << ',' << sr.totals.size() << ',' << sr.censored << ',';
            detail::write_number(out, sr.mean);
            out << ',';
            detail::write_number(out, sr.p50);
            out << ',';
            detail::write_number(out, sr.p95);
            out << ',';
            detail::write_number(out, sr.iqr);
            out << "\n";
        }
}

// ---------------------------------------------------------------------
// Configuration decoding
// ---------------------------------------------------------------------

inline EnvironmentConfig environment_from_config(ConfigFile &cfg) {
    EnvironmentConfig env;
    env.room_width_m = cfg.get_double_or("environment", "room_width_m", env.room_width_m);
    env.room_depth_m = cfg.get_double_or("environment", "room_depth_m", env.room_depth_m);
    env.tile_size_m = cfg.get_double_or("environment", "tile_size_m", env.tile_size_m);
    env.tx_x = cfg.get_double_or("environment", "tx_x", env.tx_x);
    env.tx_y = cfg.get_double_or("environment", "tx_y", env.tx_y);
    env.tx_z = cfg.get_double_or("environment", "tx_z", env.tx_z);
    env.antenna_count = cfg.get_int_or("environment", "antenna_count", env.antenna_count);
    env.multiplexing_gain =
        cfg.get_int_or("environment", "multiplexing_gain", env.multiplexing_gain);
    env.carrier_ghz = cfg.get_double_or("environment", "carrier_ghz", env.carrier_ghz);
    env.pathloss_exponent =
        cfg.get_double_or("environment", "pathloss_exponent", env.pathloss_exponent);
    env.shadowing_std_db =
        cfg.get_double_or("environment", "shadowing_std_db", env.shadowing_std_db);
    env.noise_power = cfg.get_double_or("environment", "noise_power", env.noise_power);
    env.border_snr_db = cfg.get_double_or("environment", "border_snr_db", env.border_snr_db);
    env.rate_scale = cfg.get_double_or("environment", "rate_scale", env.rate_scale);
    env.rng_seed = cfg.get_u64_or("environment", "rng_seed", env.rng_seed);
    env.rate_samples = cfg.get_int_or("environment", "rate_samples", env.rate_samples);
    return env;
}

inline Scenario scenario_from_config(ConfigFile &cfg) {
    Scenario sc;
    sc.env = environment_from_config(cfg);
    sc.user_count = cfg.get_int_or("cache", "user_count", sc.user_count);
    sc.total_memory = cfg.get_double_or("cache", "total_memory", sc.total_memory);
    sc.t_target = cfg.get_int_or("cache", "t_target", sc.t_target);
    sc.drops = cfg.get_int_or("experiment", "drops", sc.drops);
    sc.solver.max_iters = cfg.get_int_or("solver", "max_iters", sc.solver.max_iters);
    sc.solver.tol = cfg.get_double_or("solver", "tol", sc.solver.tol);
    sc.solver.inner_tol = cfg.get_double_or("solver", "inner_tol", sc.solver.inner_tol);
    return sc;
}

inline std::vector<SchemeSpec> schemes_from_config(ConfigFile &cfg) {
    if (!cfg.has("experiment", "schemes"))
        return default_schemes();
    std::vector<SchemeSpec> out;
    for (const std::string &name : cfg.get_string_list("experiment", "schemes"))
        out.push_back(scheme_by_name(name));
    if (out.empty())
        throw config_error("experiment.schemes must not be empty");
    return out;
}

// Optional direct rate-map injection, bypassing the channel simulation.
inline bool rate_map_from_config(ConfigFile &cfg, RateMap &out) {
    if (!cfg.has("rate_map", "values"))
        return false;
    out.r = cfg.get_double_list("rate_map", "values");
    if (out.r.empty())
        throw config_error("rate_map.values must not be empty");
    for (double r : out.r)
        if (!(r > 0))
            throw config_error("rate_map.values must be positive");
    return true;
}

} // namespace locache

#endif
