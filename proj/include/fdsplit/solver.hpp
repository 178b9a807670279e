// SPDX-License-Identifier: Apache-2.0
//
// fdsplit: UL/DL antenna splitting for full-duplex multi-antenna base stations
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

#ifndef FDSPLIT_SOLVER_HPP
#define FDSPLIT_SOLVER_HPP

// RLX-PROX: binary relaxation of the antenna assignment, proximal successive
// convex approximation of the relaxed problem, L random restarts, rounding.
//
// One PSCA iteration at the current relaxed point x:
//   1. MMSE filters at x
//   2. quadratic terms and the linearized SI coupling anchored at x
//   3. x_hat = argmin over [0,1]^M of x'^T L x' - 2 B^T x' + alpha/2 ||x' - x||^2
//   4. x <- x + rho (x_hat - x)
// until the step length ||x_new - x|| drops to epsilon.

#include "fdsplit/box_qp.hpp"
#include "fdsplit/config.hpp"
#include "fdsplit/decomposition.hpp"
#include "fdsplit/mse.hpp"
#include "fdsplit/rng.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace fdsplit {

struct PscaParams {
    double epsilon = 1e-3;
    double alpha = 1.0;
    double rho = 0.9;
    int max_iters = 500;

    static PscaParams from_config(const SystemConfig& cfg)
    {
        return {cfg.epsilon, cfg.alpha, cfg.rho, cfg.max_iters};
    }
};

template <typename Real>
struct BasicPscaState {
    RVector<Real> x_current;
    int iteration = 0;
    std::vector<Real> objective_trace; // sum MSE at each iterate with its filters
    std::vector<Real> step_lengths;
    BasicReceiveFilters<Real> filters;  // last filters computed inside the loop
    bool converged = false;
    Real max_kkt_residual = 0;
};

using PscaState = BasicPscaState<double>;

template <typename Real>
BasicPscaState<Real> psca_run(const BasicChannelRealization<Real>& ch, const PscaParams& params,
                              const RVector<Real>& x_init)
{
    require(x_init.size() == ch.num_antennas(), "initial point must have M entries");
    require(((x_init.array() >= Real(0)) && (x_init.array() <= Real(1))).all(), "initial point must lie in [0,1]^M");

    BasicPscaState<Real> st;
    st.x_current = x_init;
    const Real alpha = static_cast<Real>(params.alpha);
    const Real rho = static_cast<Real>(params.rho);

    while (st.iteration < params.max_iters) {
        ++st.iteration;
        const BasicAntennaAssignment<Real> x(st.x_current);
        auto [filters, report] = mmse_filters_and_report(ch, x);
        st.filters = std::move(filters);
        st.objective_trace.push_back(report.sum_mse);

        const auto terms = build_quadratic_terms(ch, st.filters);
        const auto model = build_linearized(x, terms, ch);
        const auto sub = solve_box_qp<Real>(model, st.x_current, alpha);
        st.max_kkt_residual = std::max(st.max_kkt_residual, sub.kkt_residual);

        RVector<Real> next = st.x_current + rho * (sub.x - st.x_current);
        next = next.cwiseMax(Real(0)).cwiseMin(Real(1));
        const Real step = (next - st.x_current).norm();
        st.step_lengths.push_back(step);
        st.x_current = std::move(next);
        if (step <= static_cast<Real>(params.epsilon)) {
            st.converged = true;
            break;
        }
    }
    return st;
}

// Nearest binary point (>= 0.5 goes UL). If that leaves one direction
// without antennas while both have users, the coordinate closest to 0.5
// (lowest index on ties) is flipped.
template <typename Real>
RVector<Real> round_assignment(const RVector<Real>& x, Eigen::Index num_ul = 1, Eigen::Index num_dl = 1)
{
    RVector<Real> b(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        b(k) = x(k) >= Real(0.5) ? Real(1) : Real(0);

    const Real ones = b.sum();
    const bool degenerate = ones == Real(0) || ones == static_cast<Real>(b.size());
    if (degenerate && num_ul >= 1 && num_dl >= 1 && b.size() >= 2) {
        Eigen::Index best = 0;
        Real best_dist = std::numeric_limits<Real>::infinity();
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const Real d = std::abs(x(k) - Real(0.5));
            if (d < best_dist) {
                best_dist = d;
                best = k;
            }
        }
        b(best) = Real(1) - b(best);
    }
    return b;
}

// Antennas sorted by decreasing UL share (stable, so lower index first on
// ties); candidate k puts the first k of them on UL. Returns the candidate
// with the lowest sum MSE under its own MMSE filters, smallest k on ties.
// All-DL and all-UL candidates are skipped when both directions have users.
template <typename Real>
RVector<Real> ordered_threshold_round(const BasicChannelRealization<Real>& ch, const RVector<Real>& x)
{
    const auto M = x.size();
    require(M == ch.num_antennas(), "relaxed point must have M entries");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&x](Eigen::Index a, Eigen::Index b) { return x(a) > x(b); });

    const bool both = ch.num_ul() >= 1 && ch.num_dl() >= 1 && M >= 2;
    const Eigen::Index k_lo = both ? 1 : 0;
    const Eigen::Index k_hi = both ? M - 1 : M;

    RVector<Real> cand = RVector<Real>::Zero(M);
    for (Eigen::Index k = 0; k < k_lo; ++k)
        cand(order[static_cast<std::size_t>(k)]) = Real(1);
    RVector<Real> best = cand;
    Real best_mse = std::numeric_limits<Real>::infinity();
    for (Eigen::Index k = k_lo; k <= k_hi; ++k) {
        if (k > 0)
            cand(order[static_cast<std::size_t>(k - 1)]) = Real(1);
        const Real e = evaluate_assignment(ch, BasicAntennaAssignment<Real>(cand)).sum_mse;
        if (e < best_mse) {
            best_mse = e;
            best = cand;
        }
    }
    return best;
}

template <typename Real>
RVector<Real> round_relaxed(const BasicChannelRealization<Real>& ch, const RVector<Real>& x, RoundingRule rule)
{
    if (rule == RoundingRule::Nearest)
        return round_assignment(x, ch.num_ul(), ch.num_dl());
    return ordered_threshold_round(ch, x);
}

template <typename Real>
struct BasicSolveResult {
    RVector<Real> x_binary;
    Real sum_mse = 0;
    Real sum_se = 0;
    int restart_index = 0;
    int iterations_used = 0;  // PSCA iterations of the selected restart
    int total_iterations = 0; // over all restarts
    bool converged = false;   // selected restart converged
    RVector<Real> x_relaxed;  // selected point before rounding
    Real relaxed_sum_mse = 0;
};

using SolveResult = BasicSolveResult<double>;

// Full RLX-PROX. Restart l starts from a uniform point on [0,1]^M drawn
// from rng.substream(l); selection is by relaxed sum MSE (lowest restart
// index on ties), then the winner is rounded and re-evaluated with fresh
// MMSE filters. Rounding follows cfg.rounding.
template <typename Real>
BasicSolveResult<Real> rlx_prox(const BasicChannelRealization<Real>& ch, const SystemConfig& cfg,
                                const RandomStream& rng)
{
    require(cfg.num_restarts >= 1, "at least one restart is needed");
    const auto params = PscaParams::from_config(cfg);
    const auto M = ch.num_antennas();

    BasicSolveResult<Real> best;
    best.relaxed_sum_mse = std::numeric_limits<Real>::infinity();
    for (int l = 0; l < cfg.num_restarts; ++l) {
        auto s = rng.substream(static_cast<std::uint64_t>(l));
        RVector<Real> x0(M);
        for (Eigen::Index k = 0; k < M; ++k)
            x0(k) = static_cast<Real>(s.uniform());

        const auto st = psca_run(ch, params, x0);
        best.total_iterations += st.iteration;
        const Real e = evaluate_mse(ch, BasicAntennaAssignment<Real>(st.x_current), st.filters).sum_mse;
        if (e < best.relaxed_sum_mse || best.x_relaxed.size() == 0) {
            best.relaxed_sum_mse = e;
            best.restart_index = l;
            best.iterations_used = st.iteration;
            best.converged = st.converged;
            best.x_relaxed = st.x_current;
        }
    }

    best.x_binary = round_relaxed(ch, best.x_relaxed, cfg.rounding);
    const auto report = evaluate_assignment(ch, BasicAntennaAssignment<Real>(best.x_binary));
    best.sum_mse = report.sum_mse;
    best.sum_se = report.sum_se;
    return best;
}

template <typename Real>
BasicSolveResult<Real> rlx_prox(const BasicChannelRealization<Real>& ch, const SystemConfig& cfg)
{
    return rlx_prox(ch, cfg, RandomStream(cfg.seed));
}

} // namespace fdsplit

#endif
