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

#ifndef LOCACHE_BEAMFORMING_HPP
#define LOCACHE_BEAMFORMING_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "locache/common.hpp"
#include "locache/delivery.hpp"
#include "locache/environment.hpp"

namespace locache {

// Precoder design input for one transmission: one message per codeword,
// and for every served user the split of messages into desired ones
// (user is a paying member of the codeword) and interfering ones (user
// is outside the codeword). Messages the user belongs to without own
// payload are cache-cancellable and appear in neither set.
struct BeamProblem {
    int antenna_count = 0;
    double power = 1.0; // P_T
    double noise = 1.0; // N0
    std::vector<Mask> targets;           // per message, codeword target set U
    std::vector<int> users;              // served users with positive payload
    std::vector<Eigen::VectorXcd> h;     // per served user
    std::vector<double> weight;          // per served user, c_k (max payload)
    std::vector<std::vector<int>> desired; // per served user, message indices
    std::vector<std::vector<int>> interf;  // per served user, message indices

    int message_count() const { return static_cast<int>(targets.size()); }
    int user_count() const { return static_cast<int>(users.size()); }
};

struct BeamformerSolution {
    std::vector<Eigen::VectorXcd> v;       // per message, physical scale
    std::vector<std::vector<double>> sinr; // per served user, per desired message
    std::vector<double> rate;              // per served user, R_k
    double objective = 0;                  // min_k R_k / c_k
    std::vector<double> trace;             // objective per SCA iteration
    std::string method;
    bool nulling_exact = false; // zero-forcing managed to null every victim
};

inline BeamProblem make_beam_problem(const Transmission &tx,
                                     const std::vector<Eigen::VectorXcd> &channels,
                                     double power, double noise) {
    if (power <= 0 || noise <= 0)
        throw std::domain_error("make_beam_problem: power and noise must be positive");
    BeamProblem p;
    p.power = power;
    p.noise = noise;
    const int J = static_cast<int>(tx.codewords.size());
    p.targets.reserve(static_cast<std::size_t>(J));
    for (const Codeword &cw : tx.codewords)
        p.targets.push_back(cw.target);

    std::map<int, std::vector<std::pair<int, double>>> desired_payloads;
    for (int j = 0; j < J; ++j)
        for (const DataTerm &term : tx.codewords[static_cast<std::size_t>(j)].terms)
            if (term.payload > 0)
                desired_payloads[term.user].push_back({j, to_double(term.payload)});

    for (const auto &[k, lst] : desired_payloads) {
        if (k >= static_cast<int>(channels.size()))
            throw std::domain_error("make_beam_problem: missing channel for served user");
        p.users.push_back(k);
        p.h.push_back(channels[static_cast<std::size_t>(k)]);
        double w = 0;
        std::vector<int> des;
        for (const auto &[j, pay] : lst) {
            des.push_back(j);
            w = std::max(w, pay);
        }
        p.weight.push_back(w);
        p.desired.push_back(std::move(des));
        std::vector<int> itf;
        for (int j = 0; j < J; ++j)
            if (!(p.targets[static_cast<std::size_t>(j)] & bit(k)))
                itf.push_back(j);
        p.interf.push_back(std::move(itf));
    }
    p.antenna_count = p.h.empty() ? 0 : static_cast<int>(p.h.front().size());
    for (const auto &hk : p.h)
        if (static_cast<int>(hk.size()) != p.antenna_count)
            throw std::domain_error("make_beam_problem: mismatched channel lengths");
    return p;
}

// Symmetric per-message rate a user can decode for its D desired
// messages over the multiple-access region: min over nonempty subsets Q
// of (1/|Q|) log2(1 + sum of SINRs in Q). The subset minimum for each
// cardinality takes the smallest SINRs, so ascending prefix sums cover
// every binding subset.
inline double mac_rate(std::vector<double> gammas) {
    if (gammas.empty())
        return 0;
    std::sort(gammas.begin(), gammas.end());
    double best = std::numeric_limits<double>::infinity();
    double acc = 0;
    for (std::size_t q = 0; q < gammas.size(); ++q) {
        acc += gammas[q];
        best = std::min(best, std::log2(1.0 + acc) / static_cast<double>(q + 1));
    }
    return best;
}

namespace detail {

// True per-user desired SINRs under precoders given at physical scale.
inline std::vector<std::vector<double>> true_sinrs(const BeamProblem &p,
                                                   const std::vector<Eigen::VectorXcd> &v) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(p.user_count()));
    for (int ki = 0; ki < p.user_count(); ++ki) {
        const auto &hk = p.h[static_cast<std::size_t>(ki)];
        double denom = p.noise;
        for (int j : p.interf[static_cast<std::size_t>(ki)])
            denom += std::norm(hk.dot(v[static_cast<std::size_t>(j)]));
        auto &row = out[static_cast<std::size_t>(ki)];
        for (int j : p.desired[static_cast<std::size_t>(ki)])
            row.push_back(std::norm(hk.dot(v[static_cast<std::size_t>(j)])) / denom);
    }
    return out;
}

inline void fill_rates(const BeamProblem &p, BeamformerSolution &sol) {
    sol.sinr = true_sinrs(p, sol.v);
    sol.rate.assign(static_cast<std::size_t>(p.user_count()), 0.0);
    sol.objective = std::numeric_limits<double>::infinity();
    for (int ki = 0; ki < p.user_count(); ++ki) {
        sol.rate[static_cast<std::size_t>(ki)] = mac_rate(sol.sinr[static_cast<std::size_t>(ki)]);
        sol.objective = std::min(sol.objective, sol.rate[static_cast<std::size_t>(ki)] /
                                                    p.weight[static_cast<std::size_t>(ki)]);
    }
    if (p.user_count() == 0)
        sol.objective = 0;
}

// Principal direction of the served users' channels of one message.
inline Eigen::VectorXcd mrt_direction(const BeamProblem &p, int j) {
    const int L = p.antenna_count;
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(L, L);
    for (int ki = 0; ki < p.user_count(); ++ki) {
        const auto &des = p.desired[static_cast<std::size_t>(ki)];
        if (std::find(des.begin(), des.end(), j) == des.end())
            continue;
        const auto &hk = p.h[static_cast<std::size_t>(ki)];
        const double n2 = hk.squaredNorm();
        if (n2 > 0)
            R += hk * hk.adjoint() / n2;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
    Eigen::VectorXcd d = eig.eigenvectors().col(L - 1);
    if (!(d.squaredNorm() > 0) || !(eig.eigenvalues()(L - 1) > 0)) {
        d = Eigen::VectorXcd::Zero(L);
        d(0) = 1.0;
    }
    return d.normalized();
}

// Monotone power iteration for the per-message power split on fixed
// directions: raises each message's power to meet its users' equal-SINR
// MAC thresholds under the interference of the previous iterate.
// Returns false when the unit budget cannot cover the demands.
inline bool split_powers(const BeamProblem &p, const std::vector<Eigen::VectorXcd> &dirs,
                         double rate, std::vector<double> &powers) {
    const int J = p.message_count();
    const double scale = p.power / p.noise;
    // gains[ki][j] = |g_k^H d_j|^2 at unit power
    std::vector<std::vector<double>> gains(static_cast<std::size_t>(p.user_count()));
    for (int ki = 0; ki < p.user_count(); ++ki)
        for (int j = 0; j < J; ++j)
            gains[static_cast<std::size_t>(ki)].push_back(
                scale * std::norm(p.h[static_cast<std::size_t>(ki)].dot(dirs[static_cast<std::size_t>(j)])));

    std::vector<double> thr(static_cast<std::size_t>(p.user_count()));
    for (int ki = 0; ki < p.user_count(); ++ki) {
        const double D = static_cast<double>(p.desired[static_cast<std::size_t>(ki)].size());
        thr[static_cast<std::size_t>(ki)] =
            (std::exp2(D * p.weight[static_cast<std::size_t>(ki)] * rate) - 1.0) / D;
    }
    powers.assign(static_cast<std::size_t>(J), 0.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> next(static_cast<std::size_t>(J), 0.0);
        for (int ki = 0; ki < p.user_count(); ++ki) {
            double denom = 1.0;
            for (int j : p.interf[static_cast<std::size_t>(ki)])
                denom += powers[static_cast<std::size_t>(j)] * gains[static_cast<std::size_t>(ki)][static_cast<std::size_t>(j)];
            for (int j : p.desired[static_cast<std::size_t>(ki)]) {
                const double g = gains[static_cast<std::size_t>(ki)][static_cast<std::size_t>(j)];
                if (g <= 0)
                    return thr[static_cast<std::size_t>(ki)] <= 0;
                next[static_cast<std::size_t>(j)] =
                    std::max(next[static_cast<std::size_t>(j)], thr[static_cast<std::size_t>(ki)] * denom / g);
            }
        }
        double total = std::accumulate(next.begin(), next.end(), 0.0);
        if (total > 1.0)
            return false;
        double delta = 0;
        for (int j = 0; j < J; ++j)
            delta = std::max(delta, std::abs(next[static_cast<std::size_t>(j)] - powers[static_cast<std::size_t>(j)]));
        powers = next;
        if (delta < 1e-12)
            break;
    }
    return true;
}

inline double rate_upper_bound(const BeamProblem &p) {
    double hi = std::numeric_limits<double>::infinity();
    for (int ki = 0; ki < p.user_count(); ++ki) {
        const double g = p.power * p.h[static_cast<std::size_t>(ki)].squaredNorm() / p.noise;
        hi = std::min(hi, std::log2(1.0 + g) / p.weight[static_cast<std::size_t>(ki)]);
    }
    return hi;
}

// Regularized nulling directions: each message's MRT direction filtered
// through the victims' ridge-regularized covariance. The ridge weight
// noise * J / power moves the direction from matched filtering at low
// power toward zero forcing at high power.
inline std::vector<Eigen::VectorXcd> mmse_directions(const BeamProblem &p) {
    const int L = p.antenna_count;
    const int J = p.message_count();
    const double ridge = p.noise * static_cast<double>(std::max(1, J)) / p.power;
    std::vector<Eigen::VectorXcd> dirs;
    dirs.reserve(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        Eigen::MatrixXcd C = ridge * Eigen::MatrixXcd::Identity(L, L);
        for (int ki = 0; ki < p.user_count(); ++ki)
            if (!(p.targets[static_cast<std::size_t>(j)] & bit(p.users[static_cast<std::size_t>(ki)])))
                C += p.h[static_cast<std::size_t>(ki)] * p.h[static_cast<std::size_t>(ki)].adjoint();
        Eigen::VectorXcd d = C.ldlt().solve(mrt_direction(p, j));
        if (!(d.squaredNorm() > 0))
            d = mrt_direction(p, j);
        dirs.push_back(d.normalized());
    }
    return dirs;
}

inline BeamformerSolution directional_solution(const BeamProblem &p,
                                               const std::vector<Eigen::VectorXcd> &dirs,
                                               const char *method) {
    BeamformerSolution sol;
    sol.method = method;
    const int J = p.message_count();
    const double hi0 = rate_upper_bound(p);
    std::vector<double> powers(static_cast<std::size_t>(J), 1.0 / std::max(1, J));
    if (hi0 > 0 && std::isfinite(hi0)) {
        double lo = 0, hi = hi0;
        std::vector<double> best = powers;
        bool any = false;
        for (int it = 0; it < 50 && hi - lo > 1e-9 * std::max(1.0, hi0); ++it) {
            const double mid = (lo + hi) / 2;
            std::vector<double> cand;
            if (split_powers(p, dirs, mid, cand)) {
                lo = mid;
                best = cand;
                any = true;
            } else {
                hi = mid;
            }
        }
        if (any)
            powers = best;
    }
    // Unused budget only helps: scale the split up to full power.
    const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
    const double boost = total > 0 ? 1.0 / total : 0.0;
    sol.v.resize(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j)
        sol.v[static_cast<std::size_t>(j)] =
            dirs[static_cast<std::size_t>(j)] *
            std::sqrt(p.power * powers[static_cast<std::size_t>(j)] * boost);
    fill_rates(p, sol);
    sol.trace.push_back(sol.objective);
    return sol;
}

} // namespace detail

// Matched-filter baseline: each message beams along the principal
// direction of its paying users' channels, powers split by bisection.
inline BeamformerSolution solve_mrt(const BeamProblem &problem) {
    if (problem.user_count() == 0 || problem.message_count() == 0) {
        BeamformerSolution sol;
        sol.method = "mrt";
        sol.v.assign(static_cast<std::size_t>(problem.message_count()),
                     Eigen::VectorXcd::Zero(problem.antenna_count));
        detail::fill_rates(problem, sol);
        return sol;
    }
    std::vector<Eigen::VectorXcd> dirs;
    for (int j = 0; j < problem.message_count(); ++j)
        dirs.push_back(detail::mrt_direction(problem, j));
    return detail::directional_solution(problem, dirs, "mrt");
}

// Zero-forcing baseline: each message direction is the MRT direction
// projected onto the null space of the victims' channels; when antennas
// run short the largest victim directions are removed best-effort.
inline BeamformerSolution solve_zero_forcing(const BeamProblem &problem) {
    if (problem.user_count() == 0 || problem.message_count() == 0)
        return solve_mrt(problem);
    const int L = problem.antenna_count;
    bool exact = true;
    std::vector<Eigen::VectorXcd> dirs;
    for (int j = 0; j < problem.message_count(); ++j) {
        std::vector<int> victims;
        for (int ki = 0; ki < problem.user_count(); ++ki)
            if (!(problem.targets[static_cast<std::size_t>(j)] & bit(problem.users[static_cast<std::size_t>(ki)])))
                victims.push_back(ki);
        Eigen::VectorXcd d = detail::mrt_direction(problem, j);
        if (!victims.empty()) {
            Eigen::MatrixXcd A(L, static_cast<int>(victims.size()));
            for (std::size_t c = 0; c < victims.size(); ++c)
                A.col(static_cast<int>(c)) = problem.h[static_cast<std::size_t>(victims[c])];
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU);
            int rank = 0;
            const double tol = 1e-12 * svd.singularValues()(0);
            for (int i = 0; i < svd.singularValues().size(); ++i)
                if (svd.singularValues()(i) > tol)
                    ++rank;
            const int removed = std::min(rank, L - 1);
            if (removed < rank)
                exact = false;
            for (int i = 0; i < removed; ++i) {
                const Eigen::VectorXcd u = svd.matrixU().col(i);
                d -= u * u.dot(d);
            }
            if (d.norm() < 1e-12) {
                // MRT direction lay inside the victims' span; fall back
                // to any remaining null-space direction.
                Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(L, L);
                for (int i = 0; i < removed; ++i) {
                    const Eigen::VectorXcd u = svd.matrixU().col(i);
                    Q -= u * u.adjoint();
                }
                Eigen::JacobiSVD<Eigen::MatrixXcd> qs(Q, Eigen::ComputeThinU);
                d = qs.matrixU().col(0);
                exact = exact && qs.singularValues()(0) > 1e-9;
            }
            d.normalize();
        }
        dirs.push_back(d);
    }
    BeamformerSolution sol = detail::directional_solution(problem, dirs, "zf");
    sol.nulling_exact = exact;
    return sol;
}

struct SolverOptions {
    int max_iters = 30;
    double tol = 1e-4;
    double inner_tol = 1e-6;
};

namespace detail {

#ifdef LOCACHE_PROF
inline long g_newton_count = 0;
inline long g_ls_count = 0;
#endif

// One convex feasibility instance: is there a precoder/auxiliary pair
// satisfying the linearized SINR constraints, the MAC rate demands at
// common weighted rate R, and the power budget? Variables are the real
// and imaginary precoder entries (power-normalized) followed by the
// SINR auxiliaries. Solved by a phase-I barrier Newton method on
// minimize s subject to f_i(x) <= s.
class FeasibilityProgram {
  public:
    // Linear constraint: c + b^T x <= 0. Quadratic constraints add
    // squared linear forms (v^T x)^2 restricted to one precoder block.
    struct SquaredForm {
        int block = 0; // message index, selects x[2L*block .. 2L*block+2L)
        Eigen::VectorXd v; // length 2L
    };
    struct Constraint {
        double c = 0;
        Eigen::VectorXd b; // length n
        std::vector<SquaredForm> quads;
    };

    FeasibilityProgram(int n_messages, int L, int n_gamma)
        : J_(n_messages), L_(L), n_(2 * L * n_messages + n_gamma) {}

    int dim() const { return n_; }
    int gamma_offset() const { return 2 * L_ * J_; }

    Constraint make_constraint() const {
        Constraint c;
        c.b = Eigen::VectorXd::Zero(n_);
        return c;
    }
    void add(Constraint c) { constraints_.push_back(std::move(c)); }

    double eval(const Constraint &c, const Eigen::VectorXd &x) const {
        double f = c.c + c.b.dot(x);
        for (const auto &q : c.quads) {
            const double t = q.v.dot(x.segment(2 * L_ * q.block, 2 * L_));
            f += t * t;
        }
        return f;
    }

    double max_violation(const Eigen::VectorXd &x) const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto &c : constraints_)
            m = std::max(m, eval(c, x));
        return m;
    }

    // Returns true with a strictly feasible x, or false when phase I
    // certifies the program infeasible to the given tolerance.
    bool solve(Eigen::VectorXd &x, double tol) const {
        const int m = static_cast<int>(constraints_.size());
        double s = max_violation(x);
        if (s < -1e-12)
            return true;
        s += 0.1 * (1.0 + std::abs(s));

        Eigen::VectorXd grad(n_ + 1);
        Eigen::MatrixXd hess(n_ + 1, n_ + 1);
        Eigen::VectorXd gi(n_ + 1);
        // Balance the initial barrier weight against the log-barrier
        // gradient in s so the first stage already makes progress.
        double t0 = 0;
        for (const auto &c : constraints_)
            t0 += 1.0 / (s - eval(c, x));
        for (double t = std::max(1.0, t0); t < 1e12; t *= 30.0) {
            const double s_stage = s;
            for (int newton = 0; newton < 40; ++newton) {
#ifdef LOCACHE_PROF
                ++g_newton_count;
#endif
                grad.setZero();
                hess.setZero();
                grad(n_) = t;
                bool strictly_feasible = true;
                for (const auto &c : constraints_) {
                    const double f = eval(c, x);
                    strictly_feasible = strictly_feasible && f < -1e-12;
                    const double gap = s - f;
                    gi.head(n_) = c.b;
                    for (const auto &q : c.quads) {
                        const double dv = q.v.dot(x.segment(2 * L_ * q.block, 2 * L_));
                        gi.segment(2 * L_ * q.block, 2 * L_) += 2.0 * dv * q.v;
                    }
                    gi(n_) = -1.0;
                    grad += gi / gap;
                    hess += gi * gi.transpose() / (gap * gap);
                    for (const auto &q : c.quads)
                        hess.block(2 * L_ * q.block, 2 * L_ * q.block, 2 * L_, 2 * L_)
                            .noalias() += (2.0 / gap) * (q.v * q.v.transpose());
                }
                if (strictly_feasible)
                    return true;
                // Solve H dz = -grad with a small ridge for safety.
                hess.diagonal().array() += 1e-12;
                Eigen::VectorXd dz = hess.ldlt().solve(-grad);
                const double decrement = -grad.dot(dz);
                if (!(decrement > 1e-12))
                    break;
                double step = 1.0;
                const double f0 = t * s + barrier(x, s);
                for (int ls = 0; ls < 40; ++ls) {
#ifdef LOCACHE_PROF
                    ++g_ls_count;
#endif
                    Eigen::VectorXd xn = x + step * dz.head(n_);
                    const double sn = s + step * dz(n_);
                    if (in_domain(xn, sn)) {
                        const double fn = t * sn + barrier(xn, sn);
                        if (fn <= f0 - 0.25 * step * decrement) {
                            x = xn;
                            s = sn;
                            break;
                        }
                    }
                    step *= 0.5;
                    if (ls == 39)
                        step = 0;
                }
                if (step == 0 || decrement / 2 < 1e-10 * (1.0 + std::abs(s)))
                    break;
            }
            if (max_violation(x) < -1e-12)
                return true;
            // Central-point duality bound: min s >= s - m/t.
            if (s - static_cast<double>(m) / t > tol)
                return false;
            // A stage that barely lowered s while it is still positive
            // will not turn feasible later; reject early. Feasibility
            // acceptances above are always validated strictly, so this
            // shortcut can only make the outer search conservative.
            if (s_stage - s < 1e-3 * (1.0 + std::abs(s_stage)) && s > tol)
                return false;
        }
        return max_violation(x) < -1e-12;
    }

  private:
    bool in_domain(const Eigen::VectorXd &x, double s) const {
        for (const auto &c : constraints_)
            if (s - eval(c, x) <= 0)
                return false;
        return true;
    }
    double barrier(const Eigen::VectorXd &x, double s) const {
        double b = 0;
        for (const auto &c : constraints_)
            b -= std::log(s - eval(c, x));
        return b;
    }

    int J_, L_, n_;
    std::vector<Constraint> constraints_;
};

// State of the SCA outer loop in normalized units: precoders with unit
// power budget and channels scaled so noise is one.
struct ScaState {
    std::vector<Eigen::VectorXcd> g; // normalized channels
    std::vector<Eigen::VectorXcd> w; // normalized precoders
    std::vector<std::vector<double>> sinr;
    double objective = 0;
};

inline void refresh_state(const BeamProblem &p, ScaState &st) {
    st.sinr.assign(static_cast<std::size_t>(p.user_count()), {});
    st.objective = std::numeric_limits<double>::infinity();
    for (int ki = 0; ki < p.user_count(); ++ki) {
        const auto &gk = st.g[static_cast<std::size_t>(ki)];
        double denom = 1.0;
        for (int j : p.interf[static_cast<std::size_t>(ki)])
            denom += std::norm(gk.dot(st.w[static_cast<std::size_t>(j)]));
        for (int j : p.desired[static_cast<std::size_t>(ki)])
            st.sinr[static_cast<std::size_t>(ki)].push_back(
                std::norm(gk.dot(st.w[static_cast<std::size_t>(j)])) / denom);
        st.objective = std::min(st.objective, mac_rate(st.sinr[static_cast<std::size_t>(ki)]) /
                                                  p.weight[static_cast<std::size_t>(ki)]);
    }
}

// Builds the convex subproblem at rate R around the current state and
// reports feasibility. On success x holds the found iterate.
inline bool subproblem_feasible(const BeamProblem &p, const ScaState &st, double R,
                                double inner_tol, Eigen::VectorXd &x) {
    const int J = p.message_count();
    const int L = p.antenna_count;
    std::vector<std::pair<int, int>> gamma_index; // (user index, desired slot)
    std::vector<int> gamma_base(static_cast<std::size_t>(p.user_count()) + 1, 0);
    for (int ki = 0; ki < p.user_count(); ++ki) {
        gamma_base[static_cast<std::size_t>(ki)] = static_cast<int>(gamma_index.size());
        for (std::size_t d = 0; d < p.desired[static_cast<std::size_t>(ki)].size(); ++d)
            gamma_index.push_back({ki, static_cast<int>(d)});
    }
    gamma_base[static_cast<std::size_t>(p.user_count())] = static_cast<int>(gamma_index.size());

    FeasibilityProgram fp(J, L, static_cast<int>(gamma_index.size()));
    const int goff = fp.gamma_offset();

    auto uvec = [&](const Eigen::VectorXcd &g) {
        Eigen::VectorXd u(2 * L);
        u << g.real(), g.imag();
        return u;
    };
    auto utvec = [&](const Eigen::VectorXcd &g) {
        Eigen::VectorXd u(2 * L);
        u << -g.imag().eval(), g.real().eval();
        return u;
    };

    // Power budget: sum ||w||^2 - 1 <= 0.
    {
        auto c = fp.make_constraint();
        c.c = -1.0;
        for (int j = 0; j < J; ++j) {
            for (int i = 0; i < 2 * L; ++i) {
                FeasibilityProgram::SquaredForm q;
                q.block = j;
                q.v = Eigen::VectorXd::Zero(2 * L);
                q.v(i) = 1.0;
                c.quads.push_back(std::move(q));
            }
        }
        fp.add(std::move(c));
    }

    for (int ki = 0; ki < p.user_count(); ++ki) {
        const auto &gk = st.g[static_cast<std::size_t>(ki)];
        const Eigen::VectorXd u = uvec(gk);
        const Eigen::VectorXd ut = utvec(gk);
        const auto &des = p.desired[static_cast<std::size_t>(ki)];
        const auto &itf = p.interf[static_cast<std::size_t>(ki)];
        const double ck = p.weight[static_cast<std::size_t>(ki)];

        for (std::size_t d = 0; d < des.size(); ++d) {
            const int j = des[d];
            const double gbar = st.sinr[static_cast<std::size_t>(ki)][d];
            double Sbar = 1.0 + std::norm(gk.dot(st.w[static_cast<std::size_t>(j)]));
            for (int j2 : itf)
                Sbar += std::norm(gk.dot(st.w[static_cast<std::size_t>(j2)]));
            const int gidx = goff + gamma_base[static_cast<std::size_t>(ki)] + static_cast<int>(d);

            // Linearized SINR constraint, scaled by (1 + gbar):
            // (1+gbar) q_k(w) - sum 2 Re(abar* a) + (Sbar - 2)
            //   + Sbar (gamma - gbar)/(1+gbar) <= 0
            auto c = fp.make_constraint();
            c.c = (1.0 + gbar) + (Sbar - 2.0) - Sbar * gbar / (1.0 + gbar);
            c.b(gidx) = Sbar / (1.0 + gbar);
            const double sq = std::sqrt(1.0 + gbar);
            for (int j2 : itf) {
                FeasibilityProgram::SquaredForm q1, q2;
                q1.block = j2;
                q1.v = sq * u;
                q2.block = j2;
                q2.v = sq * ut;
                c.quads.push_back(std::move(q1));
                c.quads.push_back(std::move(q2));
            }
            auto add_linear = [&](int j2) {
                const std::complex<double> abar = gk.dot(st.w[static_cast<std::size_t>(j2)]);
                c.b.segment(2 * L * j2, 2 * L) -= 2.0 * (abar.real() * u + abar.imag() * ut);
            };
            add_linear(j);
            for (int j2 : itf)
                add_linear(j2);
            fp.add(std::move(c));

            // gamma >= 0
            auto cg = fp.make_constraint();
            cg.b(gidx) = -1.0;
            fp.add(std::move(cg));
        }

        // MAC demands: 2^(|Q| c_k R) - 1 - sum_Q gamma <= 0 for every
        // nonempty subset Q of the desired messages.
        const int D = static_cast<int>(des.size());
        for (Mask Q = 1; Q < bit(D); ++Q) {
            auto c = fp.make_constraint();
            c.c = std::exp2(popcount(Q) * ck * R) - 1.0;
            for (int d = 0; d < D; ++d)
                if (Q & bit(d))
                    c.b(goff + gamma_base[static_cast<std::size_t>(ki)] + d) = -1.0;
            fp.add(std::move(c));
        }
    }

    // Start from the current iterate, which is feasible whenever
    // R <= current objective by tightness of the linearization.
    x = Eigen::VectorXd::Zero(fp.dim());
    for (int j = 0; j < J; ++j) {
        x.segment(2 * L * j, L) = st.w[static_cast<std::size_t>(j)].real();
        x.segment(2 * L * j + L, L) = st.w[static_cast<std::size_t>(j)].imag();
    }
    for (std::size_t gi = 0; gi < gamma_index.size(); ++gi)
        x(goff + static_cast<int>(gi)) =
            st.sinr[static_cast<std::size_t>(gamma_index[gi].first)]
                   [static_cast<std::size_t>(gamma_index[gi].second)];
    return fp.solve(x, inner_tol);
}

} // namespace detail

// Largest feasible common weighted rate of the convex subproblem built
// around the given state, found by bisection on R; the state's
// precoders are replaced when a better iterate is found. The window top
// is probed first so a tight window costs a single feasibility solve.
inline double solve_convex_subproblem(const BeamProblem &problem, detail::ScaState &st,
                                      double hi, const SolverOptions &options) {
    const int J = problem.message_count();
    const int L = problem.antenna_count;
    double lo = st.objective;
    Eigen::VectorXd x, best_x;
    bool improved = false;
    if (hi > lo && detail::subproblem_feasible(problem, st, hi, options.inner_tol, x)) {
        lo = hi;
        best_x = x;
        improved = true;
    } else {
        for (int it = 0; it < 8; ++it) {
            if (hi - lo <= options.inner_tol * std::max(1.0, std::abs(lo)))
                break;
            const double mid = lo + (hi - lo) / 2;
            if (detail::subproblem_feasible(problem, st, mid, options.inner_tol, x)) {
                lo = mid;
                best_x = x;
                improved = true;
            } else {
                hi = mid;
            }
        }
    }
    if (improved) {
        for (int j = 0; j < J; ++j) {
            Eigen::VectorXcd wj(L);
            wj.real() = best_x.segment(2 * L * j, L);
            wj.imag() = best_x.segment(2 * L * j + L, L);
            st.w[static_cast<std::size_t>(j)] = wj;
        }
    }
    return lo;
}

// Weighted max-min beamformer: successive convex approximation around
// the true SINR point, each round solving the linearized subproblem by
// bisection on the common weighted rate. The trace of true objectives
// is non-decreasing because the linearization is tight at the iterate.
inline BeamformerSolution solve_wmm_sca(const BeamProblem &problem,
                                        const SolverOptions &options = {}) {
    BeamformerSolution init = solve_zero_forcing(problem);
    if (problem.user_count() == 0 || problem.message_count() == 0 ||
        !(detail::rate_upper_bound(problem) > 0) ||
        !std::isfinite(detail::rate_upper_bound(problem))) {
        init.method = "sca";
        return init;
    }
    {
        BeamformerSolution mrt = solve_mrt(problem);
        if (mrt.objective > init.objective) {
            init = mrt;
            init.nulling_exact = false;
        }
        BeamformerSolution mmse =
            detail::directional_solution(problem, detail::mmse_directions(problem), "mmse");
        if (mmse.objective > init.objective) {
            init = mmse;
            init.nulling_exact = false;
        }
    }

    const double sqrtPT = std::sqrt(problem.power);
    detail::ScaState st;
    st.g.reserve(static_cast<std::size_t>(problem.user_count()));
    const double gscale = std::sqrt(problem.power / problem.noise);
    for (const auto &hk : problem.h)
        st.g.push_back(gscale * hk);
    st.w.reserve(static_cast<std::size_t>(problem.message_count()));
    for (const auto &vj : init.v)
        st.w.push_back(vj / sqrtPT);
    detail::refresh_state(problem, st);

    BeamformerSolution sol;
    sol.method = "sca";
    sol.nulling_exact = init.nulling_exact;
    sol.trace.push_back(st.objective);
    std::vector<Eigen::VectorXcd> best_w = st.w;
    double best_obj = st.objective;

    // The per-round bisection runs inside a sliding window above the
    // current objective; the window adapts to recent progress so most
    // rounds cost one or two feasibility solves.
    const double hi = detail::rate_upper_bound(problem);
    double step = std::max(0.25 * (hi - best_obj), 1e-3);
    int stalled = 0;
    for (int iter = 0; iter < options.max_iters; ++iter) {
        const double before = st.objective;
        const double window = std::min(hi, st.objective + step);
        const double reached = solve_convex_subproblem(problem, st, window, options);
        detail::refresh_state(problem, st);
        if (st.objective > best_obj) {
            best_obj = st.objective;
            best_w = st.w;
        } else {
            // Keep the trace monotone: fall back to the best iterate.
            st.w = best_w;
            detail::refresh_state(problem, st);
        }
        sol.trace.push_back(best_obj);
        const double gained = reached - before;
        if (reached >= window - options.inner_tol * std::max(1.0, window))
            step *= 4.0;
        else
            step = std::max(2.0 * gained, 0.25 * step);
        if (best_obj - before <= options.tol * std::max(1.0, std::abs(before))) {
            if (++stalled >= 2)
                break;
        } else {
            stalled = 0;
        }
    }

    sol.v.clear();
    for (const auto &wj : best_w)
        sol.v.push_back(wj * sqrtPT);
    detail::fill_rates(problem, sol);
    return sol;
}

} // namespace locache

#endif
