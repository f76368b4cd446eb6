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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "locache/io.hpp"

namespace {

using namespace locache;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

ConfigFile load_config(const CommonArgs &args) {
    if (args.config_path.empty())
        throw config_error("--config is required");
    return ConfigFile::parse_file(args.config_path);
}

void apply_overrides(Scenario &sc, const CommonArgs &args) {
    if (args.seed)
        sc.env.rng_seed = *args.seed;
}

std::ofstream open_out(const std::string &path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    return out;
}

// Rate map either injected via [rate_map] values or estimated from the
// simulated environment. The grid is only built in the latter case.
RateMap resolve_rate_map(ConfigFile &cfg, const Scenario &sc, std::optional<StateGrid> &grid) {
    RateMap rm;
    if (rate_map_from_config(cfg, rm))
        return rm;
    grid = build_grid(sc.env);
    return estimate_rate_map(*grid, sc.env, sc.env.rate_samples);
}

// One config file can drive the whole pipeline, so each tool reads its
// own keys and then acknowledges the sections owned by sibling tools
// before the unknown-key check runs. Typos still fail: only keys in the
// documented schema are acknowledged.
void acknowledge_sibling_keys(ConfigFile &cfg) {
    if (cfg.has("cache", "tradeoff")) {
        if (cfg.is_string("cache", "tradeoff"))
            cfg.get_string("cache", "tradeoff");
        else
            cfg.get_double("cache", "tradeoff");
    }
    if (cfg.has("experiment", "schemes"))
        cfg.get_string_list("experiment", "schemes");
    cfg.get_int_or("experiment", "bootstrap_resamples", 0);
    cfg.get_string_or("experiment", "sweep_parameter", "");
    if (cfg.has("experiment", "sweep_values"))
        cfg.get_double_list("experiment", "sweep_values");
    if (cfg.has("rate_map", "values"))
        cfg.get_double_list("rate_map", "values");
    cfg.get_string_or("plan", "scheme", "");
    if (cfg.has("plan", "user_states"))
        cfg.get_double_list("plan", "user_states");
    cfg.get_int_or("solve", "drop", 0);
}

double tradeoff_from_config(ConfigFile &cfg, const Scenario &sc) {
    if (!cfg.has("cache", "tradeoff"))
        return tradeoff_weight(AllocationRule::multicast_aware, sc.user_count,
                               sc.env.multiplexing_gain);
    if (cfg.is_string("cache", "tradeoff")) {
        const std::string name = cfg.get_string("cache", "tradeoff");
        if (name == "local_first")
            return tradeoff_weight(AllocationRule::local_first, sc.user_count,
                                   sc.env.multiplexing_gain);
        if (name == "multicast_aware")
            return tradeoff_weight(AllocationRule::multicast_aware, sc.user_count,
                                   sc.env.multiplexing_gain);
        throw config_error("cache.tradeoff must be local_first, multicast_aware, or a number");
    }
    const double phi = cfg.get_double("cache", "tradeoff");
    if (!(phi > 0))
        throw config_error("cache.tradeoff must be positive");
    return phi;
}

int cmd_rate_map(const CommonArgs &args, const std::string &out_path) {
    ConfigFile cfg = load_config(args);
    Scenario sc = scenario_from_config(cfg);
    apply_overrides(sc, args);
    acknowledge_sibling_keys(cfg);
    cfg.require_consumed();
    sc.validate();
    const StateGrid grid = build_grid(sc.env);
    const RateMap rm = estimate_rate_map(grid, sc.env, sc.env.rate_samples);
    auto out = open_out(out_path);
    write_rate_map_csv(out, grid, rm, cfg.resolved());
    double lo = rm.r[0], hi = rm.r[0];
    for (double r : rm.r) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    std::cout << "rate map: " << grid.size() << " states, r in [" << lo << ", " << hi << "]\n";
    return 0;
}

int cmd_allocate(const CommonArgs &args, const std::string &out_path) {
    ConfigFile cfg = load_config(args);
    Scenario sc = scenario_from_config(cfg);
    apply_overrides(sc, args);
    std::optional<StateGrid> grid;
    AllocationProblem problem;
    problem.rate_map = resolve_rate_map(cfg, sc, grid);
    problem.total_memory = sc.total_memory;
    problem.user_count = sc.user_count;
    problem.tradeoff = tradeoff_from_config(cfg, sc);
    acknowledge_sibling_keys(cfg);
    cfg.require_consumed();
    const MemoryAllocation alloc = allocate(problem);
    auto out = open_out(out_path);
    write_allocation_csv(out, alloc, cfg.resolved());
    std::cout << "allocation: S=" << problem.rate_map.size() << " m_bar=" << alloc.m_bar
              << " gamma=" << alloc.gamma << " objective=" << alloc.objective << "\n";
    return 0;
}

PreparedScheme prepare_single_scheme(const Scenario &sc, const RateMap &rm,
                                     const SchemeSpec &spec) {
    PreparedScheme ps;
    ps.spec = spec;
    if (spec.allocation == AllocationRule::uniform) {
        ps.allocation = uniform_allocation(rm, sc.total_memory, sc.user_count);
    } else {
        AllocationProblem ap;
        ap.rate_map = rm;
        ap.total_memory = sc.total_memory;
        ap.user_count = sc.user_count;
        ap.tradeoff = tradeoff_weight(spec.allocation, sc.user_count, sc.env.multiplexing_gain);
        ps.allocation = allocate(ap);
    }
    ps.layout = place(ps.allocation, sc.user_count);
    return ps;
}

std::vector<int> user_states_from_config(ConfigFile &cfg, int state_count, int user_count) {
    if (!cfg.has("plan", "user_states"))
        throw config_error("plan.user_states is required");
    std::vector<int> states;
    for (double v : cfg.get_double_list("plan", "user_states")) {
        const int s = static_cast<int>(std::lround(v));
        if (std::abs(v - s) > 1e-9 || s < 0 || s >= state_count)
            throw config_error("plan.user_states entries must be state indices");
        states.push_back(s);
    }
    if (static_cast<int>(states.size()) != user_count)
        throw config_error("plan.user_states must list one state per user");
    return states;
}

int cmd_plan(const CommonArgs &args, const std::string &out_path) {
    ConfigFile cfg = load_config(args);
    Scenario sc = scenario_from_config(cfg);
    apply_overrides(sc, args);
    std::optional<StateGrid> grid;
    const RateMap rm = resolve_rate_map(cfg, sc, grid);
    const SchemeSpec spec =
        scheme_by_name(cfg.get_string_or("plan", "scheme", "proposed_multicast_aware"));
    const std::vector<int> user_states = user_states_from_config(cfg, rm.size(), sc.user_count);
    acknowledge_sibling_keys(cfg);
    cfg.require_consumed();
    sc.validate();

    const PreparedScheme ps = prepare_single_scheme(sc, rm, spec);
    const std::vector<UserDemand> demands = make_demands(user_states, ps.layout);
    const int t_target = sc.resolved_t_target(rm.size());
    const TransmissionPlan plan =
        build_scheme_plan(ps, demands, sc.env.multiplexing_gain, t_target);
    assert_complete(plan, demands, ps.layout);

    Json j = provenance_json(cfg.resolved());
    j["scheme"] = spec.name;
    j["user_states"] = user_states;
    j["t_target"] = t_target;
    j["plan"] = plan_to_json(plan);
    j["plan_hash"] = hash_string(plan_hash(plan));
    auto out = open_out(out_path);
    out << j.dump(2) << "\n";
    std::cout << "plan: " << plan.transmissions.size() << " transmissions, hash "
              << hash_string(plan_hash(plan)) << "\n";
    return 0;
}

int cmd_solve_beams(const CommonArgs &args, const std::string &plan_path,
                    const std::string &out_path) {
    ConfigFile cfg = load_config(args);
    Scenario sc = scenario_from_config(cfg);
    apply_overrides(sc, args);
    const int drop = cfg.get_int_or("solve", "drop", 0);
    acknowledge_sibling_keys(cfg);
    cfg.require_consumed();
    sc.validate();

    std::ifstream in(plan_path);
    if (!in)
        throw std::runtime_error("cannot open plan file: " + plan_path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception &e) {
        throw config_error("malformed plan file: " + std::string(e.what()));
    }
    const TransmissionPlan plan = plan_from_json(j.at("plan"));
    const std::uint64_t hash = plan_hash(plan);
    if (j.contains("plan_hash") && j.at("plan_hash").get<std::string>() != hash_string(hash))
        throw std::runtime_error("plan file hash mismatch: content was altered");
    std::vector<int> user_states;
    for (const auto &e : j.at("user_states"))
        user_states.push_back(e.get<int>());
    if (static_cast<int>(user_states.size()) != plan.user_count)
        throw config_error("plan file user_states do not match the plan");

    const StateGrid grid = build_grid(sc.env);
    const double power = calibrate_power(sc.env, grid);
    auto fading_rng =
        make_rng(sc.env.rng_seed, StreamTag::fading, static_cast<std::uint64_t>(drop));
    const ChannelRealization ch = draw_channels(grid, user_states, sc.env, fading_rng);

    Json out_doc = provenance_json(cfg.resolved());
    out_doc["plan_hash"] = hash_string(hash);
    out_doc["drop"] = drop;
    Json txs = Json::array();
    double total = 0;
    bool censored = false;
    for (const Transmission &tx : plan.transmissions) {
        const BeamProblem problem = make_beam_problem(tx, ch.h, power, sc.env.noise_power);
        const BeamformerSolution sol = solve_transmission(problem, sc.solver);
        const double t = transmission_time(problem, sol);
        total += t;
        if (std::isinf(t))
            censored = true;
        Json jt;
        jt["users"] = problem.users;
        jt["method"] = sol.method;
        jt["objective"] = sol.objective;
        jt["rates"] = sol.rate;
        jt["time"] = t;
        txs.push_back(std::move(jt));
    }
    out_doc["transmissions"] = std::move(txs);
    out_doc["total_time"] = total;
    out_doc["censored"] = censored;
    auto out = open_out(out_path);
    out << out_doc.dump(2) << "\n";
    std::cout << "solve-beams: " << plan.transmissions.size() << " transmissions, total time "
              << total << ", plan hash " << hash_string(hash) << "\n";
    return 0;
}

int cmd_experiment(const CommonArgs &args, const std::string &out_dir) {
    ConfigFile cfg = load_config(args);
    Scenario sc = scenario_from_config(cfg);
    apply_overrides(sc, args);
    const std::vector<SchemeSpec> schemes = schemes_from_config(cfg);
    const int resamples = cfg.get_int_or("experiment", "bootstrap_resamples", 1000);
    std::optional<std::string> sweep_name;
    std::vector<double> sweep_values;
    if (cfg.has("experiment", "sweep_parameter")) {
        sweep_name = cfg.get_string("experiment", "sweep_parameter");
        sweep_values = cfg.get_double_list("experiment", "sweep_values");
    }
    acknowledge_sibling_keys(cfg);
    cfg.require_consumed();
    sc.validate();

    std::filesystem::create_directories(out_dir);
    const std::string resolved = cfg.resolved();

    if (sweep_name) {
        const SweepResult sweep =
            run_sweep(sc, schemes, sweep_parameter_by_name(*sweep_name), sweep_values);
        auto out = open_out(out_dir + "/sweep.csv");
        write_sweep_csv(out, sweep, resolved);
        std::cout << "sweep over " << *sweep_name << ": " << sweep.points.size() << " points, "
                  << schemes.size() << " schemes, " << sc.drops << " drops each\n";
        return 0;
    }

    const CdfResult result = run_cdf_experiment(sc, schemes);
    {
        auto out = open_out(out_dir + "/drops.csv");
        write_drops_csv(out, result, resolved);
    }
    {
        auto out = open_out(out_dir + "/summary.csv");
        write_summary_csv(out, result, resolved);
    }
    if (result.schemes.size() >= 2 && resamples > 0) {
        auto out = open_out(out_dir + "/bootstrap.csv");
        write_provenance(out, resolved);
        out.precision(17);
        out << "scheme,baseline,stat,point,lo,hi,prob_ge_zero\n";
        auto rng = make_rng(sc.env.rng_seed, StreamTag::bootstrap);
        const SchemeResult &base = result.schemes.front();
        const auto mean_stat = [](const std::vector<double> &v) { return mean_uncensored(v); };
        const auto p95_stat = [](const std::vector<double> &v) {
            return percentile_nearest_rank(v, 95.0);
        };
        for (std::size_t i = 1; i < result.schemes.size(); ++i) {
            const SchemeResult &sr = result.schemes[i];
            const BootstrapSummary bm =
                paired_bootstrap(sr.totals, base.totals, mean_stat, resamples, rng);
            out << sr.scheme << ',' << base.scheme << ",mean," << bm.point << ',' << bm.lo << ','
                << bm.hi << ',' << bm.prob_ge_zero << "\n";
            const BootstrapSummary bp =
                paired_bootstrap(sr.totals, base.totals, p95_stat, resamples, rng);
            out << sr.scheme << ',' << base.scheme << ",p95," << bp.point << ',' << bp.lo << ','
                << bp.hi << ',' << bp.prob_ge_zero << "\n";
        }
    }
    for (const SchemeResult &sr : result.schemes)
        std::cout << sr.scheme << ": mean=" << sr.mean << " p50=" << sr.p50 << " p95=" << sr.p95
                  << " censored=" << sr.censored << "/" << sr.totals.size() << "\n";
    return 0;
}

bool close_to(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Re-derives the worked reference scenarios and checks the frozen
// values, so an installed binary can self-test without the dev tree.
int cmd_reproduce_examples() {
    int failures = 0;
    const auto report = [&](const std::string &name, bool ok) {
        std::cout << name << " " << (ok ? "PASS" : "FAIL") << "\n";
        if (!ok)
            ++failures;
    };

    // Five-state cache allocation with a balanced tradeoff.
    const RateMap rm{{3000, 2000, 1000, 2000, 3000}};
    AllocationProblem ap;
    ap.rate_map = rm;
    ap.total_memory = 2.25;
    ap.user_count = 4;
    ap.tradeoff = 0.5;
    const MemoryAllocation alloc = allocate(ap);
    const std::vector<double> want_m = {0.25, 0.5, 0.75, 0.5, 0.25};
    bool ok = close_to(alloc.gamma, 2.5e-4, 1e-9);
    for (std::size_t s = 0; s < want_m.size(); ++s)
        ok = ok && close_to(alloc.m[s], want_m[s], 1e-6);
    report("allocation-five-states", ok);

    // Nested multicast schedule with mixed gains (1, 2, 2, 1).
    const CacheLayout layout = place_gains({1, 2, 2, 1}, 4);
    const auto demands = make_demands({0, 1, 2, 3}, layout);
    const TransmissionPlan plan = build_multicast_plan(demands, layout, 2, common_gain(demands));
    ok = plan.transmissions.size() == 4;
    for (const Transmission &tx : plan.transmissions)
        ok = ok && tx.codewords.size() == 3;
    const auto rep = verify_completeness(plan, demands, layout);
    ok = ok && rep.complete;
    ok = ok && rep.delivered[0] == Rational(3, 4) && rep.delivered[1] == Rational(1, 2);
    const DataTerm &t0 = plan.transmissions[0].codewords[0].terms[0];
    ok = ok && t0.payload == Rational(1, 8);
    report("schedule-mixed-gains", ok);

    // Phantom lift: gains (3, 3, 3, 1) with a target gain of 3.
    const CacheLayout lay3 = place_gains({3, 3, 3, 1}, 4);
    const auto dem3 = make_demands({0, 1, 2, 3}, lay3);
    const TransmissionPlan plan3 = build_phantom_plan(dem3, lay3, 2, 3);
    const auto rep3 = verify_completeness(plan3, dem3, lay3);
    ok = rep3.complete && plan3.phantom_excluded == bit(3);
    ok = ok && rep3.delivered[0] == Rational(1, 4) && rep3.delivered[3] == Rational(3, 4);
    report("phantom-lift", ok);

    // Fractional gain 1.2 splits into two parts and still delivers
    // exactly the uncached fraction.
    const CacheLayout lay4 = place_gains({1.2, 2, 2, 1}, 4);
    const auto dem4 = make_demands({0, 1, 2, 3}, lay4);
    const TransmissionPlan plan4 = build_multicast_plan(dem4, lay4, 2, common_gain(dem4));
    const auto rep4 = verify_completeness(plan4, dem4, lay4);
    ok = rep4.complete && close_to(to_double(rep4.delivered[0]), 0.7, 1e-15);
    report("memory-sharing", ok);

    // Allocation-only time estimate on the five-state example.
    const double approx = approx_total_time(alloc, rm, 4, 2);
    report("time-estimate", close_to(approx, 4.0 / 3.0 * 2.5e-4, 1e-9));

    return failures == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"locache: location-dependent coded caching simulator"};
    app.require_subcommand(1);

    CommonArgs common;
    const auto add_common = [&](CLI::App *sub, bool needs_config) {
        auto *copt = sub->add_option("--config", common.config_path, "configuration file");
        if (needs_config)
            copt->required();
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t &v) { common.seed = v; },
            "override environment.rng_seed");
        sub->add_option("--threads", common.threads, "worker cap (runs are sequential today)")
            ->check(CLI::PositiveNumber);
    };

    std::string out_path = "out.csv";
    std::string out_dir = ".";
    std::string plan_path;

    CLI::App *rate_map = app.add_subcommand("rate-map", "estimate the per-state rate map");
    add_common(rate_map, true);
    rate_map->add_option("--out", out_path, "output CSV path")->required();

    CLI::App *allocate_cmd = app.add_subcommand("allocate", "optimize the cache memory split");
    add_common(allocate_cmd, true);
    allocate_cmd->add_option("--out", out_path, "output CSV path")->required();

    CLI::App *plan_cmd = app.add_subcommand("plan", "build a delivery schedule");
    add_common(plan_cmd, true);
    plan_cmd->add_option("--out", out_path, "output JSON path")->required();

    CLI::App *solve_cmd = app.add_subcommand("solve-beams", "solve beamformers for a plan");
    add_common(solve_cmd, true);
    solve_cmd->add_option("--plan", plan_path, "plan JSON from the plan subcommand")->required();
    solve_cmd->add_option("--out", out_path, "output JSON path")->required();

    CLI::App *exp_cmd = app.add_subcommand("experiment", "run Monte Carlo comparisons");
    add_common(exp_cmd, true);
    exp_cmd->add_option("--out-dir", out_dir, "output directory");

    CLI::App *repro = app.add_subcommand("reproduce-examples", "check built-in reference results");
    add_common(repro, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (rate_map->parsed())
            return cmd_rate_map(common, out_path);
        if (allocate_cmd->parsed())
            return cmd_allocate(common, out_path);
        if (plan_cmd->parsed())
            return cmd_plan(common, out_path);
        if (solve_cmd->parsed())
            return cmd_solve_beams(common, plan_path, out_path);
        if (exp_cmd->parsed())
            return cmd_experiment(common, out_dir);
        if (repro->parsed())
            return cmd_reproduce_examples();
    } catch (const config_error &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
