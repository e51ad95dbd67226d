// SPDX-License-Identifier: Apache-2.0
//
// pilotforge - coordinated uplink pilot design for multicell massive MIMO
// Copyright (C) 2026 pilotforge contributors
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

#ifndef pilotforge_maxmin_H
#define pilotforge_maxmin_H

#include "common.hpp"
#include "network.hpp"
#include "pilots.hpp"
#include "solvers.hpp"

#include <chrono>
#include <vector>

namespace pilotforge
{

// Asymptotic SINR of every user under squared powers xi = p^2:
// SINR_lk = beta_llk^2 xi_lk / sum over co-pilot users (i,j) of beta_lij^2 xi_ij.
// Users whose pilot is shared by nobody are reported at the SINR cap. A user
// that shares its pilot but transmits nothing reports 0 (limit from p > 0),
// so zeroing out a whole co-pilot group can never raise the minimum.
inline arma::mat sinr_map(const NetworkInstance &inst, const arma::umat &assignment,
                          const arma::mat &xi)
{
    const std::size_t L = inst.cells(), K = inst.users();
    arma::mat out(L, K);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            double b = inst.beta(l, l, k);
            double own = b * b * xi(l, k);
            double interf = 0.0;
            bool copilot = false;
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    if ((i == l && j == k) || assignment(i, j) != assignment(l, k))
                        continue;
                    copilot = true;
                    double bij = inst.beta(l, i, j);
                    interf += bij * bij * xi(i, j);
                }
            if (interf > 0.0)
                out(l, k) = std::min(own / interf, sinr_cap());
            else
                out(l, k) = (copilot && own == 0.0) ? 0.0 : sinr_cap();
        }
    return out;
}

// Smallest SINR over users that actually see co-pilot interference; the cap
// sentinel is returned when every user is interference-free.
inline double min_sinr(const NetworkInstance &inst, const arma::umat &assignment,
                       const arma::mat &xi)
{
    const std::size_t L = inst.cells(), K = inst.users();
    arma::mat s = sinr_map(inst, assignment, xi);
    double best = sinr_cap();
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
            if (s(l, k) < best)
                best = s(l, k);
    return best;
}

// One epigraph step of the generalized ratio iteration: maximize t subject to
// beta_llk^2 xi_lk - lambda * sum(co-pilot beta^2 xi) >= t and 0 <= xi <= P_max^2.
// Interference-free users are pinned at xi = P_max^2 and excluded from the
// constraints; the returned xi is rescaled so its maximum equals P_max^2.
// When t_out is given it receives the program optimum, whose sign certifies
// whether min-SINR lambda is achievable (positive) or not (nonpositive).
inline arma::mat dinkelbach_power_step(const NetworkInstance &inst, const arma::umat &assignment,
                                       double lambda, double *t_out = nullptr)
{
    const std::size_t L = inst.cells(), K = inst.users();
    const double xi_max = inst.config.max_power_mw * inst.config.max_power_mw;

    std::vector<std::size_t> constrained;
    std::vector<long> var_of(L * K, -1);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            bool has_interf = false;
            for (std::size_t i = 0; i < L && !has_interf; i++)
                for (std::size_t j = 0; j < K; j++)
                    if (!(i == l && j == k) && assignment(i, j) == assignment(l, k))
                    {
                        has_interf = true;
                        break;
                    }
            if (has_interf)
            {
                var_of[user_index(l, k, K)] = long(constrained.size());
                constrained.push_back(user_index(l, k, K));
            }
        }

    arma::mat xi(L, K);
    xi.fill(xi_max);
    if (constrained.empty())
    {
        if (t_out)
            *t_out = std::numeric_limits<double>::infinity();
        return xi;
    }

    const std::size_t n = constrained.size();
    double bmax = inst.beta.max();
    double t_big = 2.0 * bmax * bmax * xi_max * (1.0 + lambda * double(n)) + 1.0;

    arma::vec c(n + 1, arma::fill::zeros);
    c(n) = 1.0; // maximize t
    arma::mat A(n, n + 1, arma::fill::zeros);
    arma::vec b(n, arma::fill::zeros);
    for (std::size_t r = 0; r < n; r++)
    {
        std::size_t u = constrained[r];
        std::size_t l = u / K, k = u % K;
        double bo = inst.beta(l, l, k);
        A(r, n) = 1.0;          // t
        A(r, r) -= bo * bo;     // own signal
        for (std::size_t i = 0; i < L; i++)
            for (std::size_t j = 0; j < K; j++)
            {
                if ((i == l && j == k) || assignment(i, j) != assignment(l, k))
                    continue;
                double bij = inst.beta(l, i, j);
                A(r, var_of[user_index(i, j, K)]) += lambda * bij * bij;
            }
    }
    arma::vec lo(n + 1, arma::fill::zeros), hi(n + 1);
    hi.head(n).fill(xi_max);
    lo(n) = -t_big;
    hi(n) = t_big;

    LpResult lp = simplex_solve(c, A, b, lo, hi);
    if (lp.status != LpStatus::Optimal)
        throw numerical_error("dinkelbach_power_step: power program did not reach optimality");

    // The optimum of t can leave non-binding powers anywhere; push each one
    // as far toward the box as the other rows allow (raising xi_s only
    // tightens rows where user s appears as an interferer). Keeps t optimal
    // and makes the returned point deterministic.
    arma::vec x = lp.x.head(n);
    const double t_opt = lp.x(n);
    if (t_out)
        *t_out = t_opt;
    arma::vec slack = -t_opt - A.cols(0, n - 1) * x; // row slack, >= 0 at the LP point
    for (std::size_t s = 0; s < n; s++)
    {
        double room = xi_max - x(s);
        for (std::size_t r = 0; r < n; r++)
            if (r != s && A(r, s) > 0.0)
                room = std::min(room, std::max(0.0, slack(r)) / A(r, s));
        if (room > 0.0)
        {
            x(s) += room;
            for (std::size_t r = 0; r < n; r++)
                slack(r) -= A(r, s) * room;
        }
    }

    // scaling all xi together preserves feasibility and the optimal t when
    // t >= 0, so pin the strongest user at the cap; a degenerate optimum at
    // the origin (t = 0 exactly) admits any ray, take the uniform one
    double peak = x.max();
    if (peak > 0.0)
        x *= xi_max / peak;
    else
        x.fill(xi_max);
    x = arma::clamp(x, 0.0, xi_max); // unscaling and rescaling round by an ulp
    for (std::size_t r = 0; r < n; r++)
    {
        std::size_t u = constrained[r];
        xi(u / K, u % K) = x(r);
    }
    return xi;
}

// Greedy pilot reassignment: each pass the worst-SINR user switches (or
// swaps with an in-cell peer) to the pilot maximizing its own SINR among
// moves that do not lower the network minimum; at most max_passes passes.
inline arma::umat smart_assignment(const NetworkInstance &inst, const arma::umat &assignment_in,
                                   const arma::mat &power, std::size_t max_passes = 10,
                                   std::size_t tau_hint = 0)
{
    const std::size_t L = inst.cells(), K = inst.users();
    const std::size_t tau = tau_hint ? tau_hint : arma::uword(assignment_in.max()) + 1;
    arma::umat assignment = assignment_in;
    arma::mat xi = arma::square(power);

    for (std::size_t pass = 0; pass < max_passes; pass++)
    {
        arma::mat s = sinr_map(inst, assignment, xi);
        double cur_min = sinr_cap();
        std::size_t wl = 0, wk = 0;
        bool found = false;
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
                if (s(l, k) < cur_min)
                {
                    cur_min = s(l, k);
                    wl = l;
                    wk = k;
                    found = true;
                }
        if (!found)
            break; // everyone interference-free

        std::size_t cur_pilot = assignment(wl, wk);
        std::size_t best_pilot = cur_pilot;
        double best_own = s(wl, wk);
        for (std::size_t cand = 0; cand < tau; cand++)
        {
            if (cand == cur_pilot)
                continue;
            arma::umat trial = assignment;
            trial(wl, wk) = cand;
            for (std::size_t k2 = 0; k2 < K; k2++) // swap with the in-cell holder, if any
                if (k2 != wk && trial(wl, k2) == cand)
                {
                    trial(wl, k2) = cur_pilot;
                    break;
                }
            arma::mat st = sinr_map(inst, trial, xi);
            double trial_min = st.min();
            double own = st(wl, wk);
            if (trial_min >= cur_min * (1.0 - 1e-12) && own > best_own * (1.0 + 1e-12))
            {
                best_own = own;
                best_pilot = cand;
            }
        }
        if (best_pilot == cur_pilot)
            break; // pass made no change
        std::size_t old = assignment(wl, wk);
        assignment(wl, wk) = best_pilot;
        for (std::size_t k2 = 0; k2 < K; k2++)
            if (k2 != wk && assignment(wl, k2) == best_pilot)
            {
                assignment(wl, k2) = old;
                break;
            }
    }
    return assignment;
}

struct Algo3Options
{
    double rel_tol = 1e-6;
    std::size_t max_inner = 100;
    std::size_t outer_iters = 1; // assignment refreshes
    std::size_t smart_passes = 10;
};

struct MaxminResult
{
    PilotConfiguration pilots;
    std::vector<double> lambda_trace; // min-SINR after each power step
    std::vector<double> elapsed_ms;
    double min_sinr = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Max-min asymptotic rate design: greedy reassignment followed by the
// generalized ratio iteration on squared powers. The lambda trace is
// nondecreasing by construction; a decrease raises numerical_error.
inline MaxminResult run_algorithm3(const NetworkInstance &inst, const PilotConfiguration &init,
                                   const Algo3Options &opts = {})
{
    if (!init.orthogonal())
        throw std::invalid_argument("run_algorithm3: initialization must be orthogonal");
    const std::size_t L = inst.cells(), K = inst.users();
    if (K > init.tau)
        throw std::invalid_argument("run_algorithm3: needs K <= tau");
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    arma::umat assignment = init.assignment;
    arma::mat power = init.power;
    MaxminResult res;

    for (std::size_t outer = 0; outer < opts.outer_iters; outer++)
    {
        assignment = smart_assignment(inst, assignment, power, opts.smart_passes, init.tau);
        arma::mat xi = arma::square(power);
        double lambda = min_sinr(inst, assignment, xi);
        res.lambda_trace.push_back(lambda);
        res.elapsed_ms.push_back(ms());
        if (lambda >= sinr_cap())
        {
            res.converged = true;
            break;
        }
        // The plain ratio iteration stalls when interference denominators
        // span many orders of magnitude, so drive the auxiliary value with a
        // bracket instead: double the probe until the program optimum turns
        // nonpositive (probe unachievable), then bisect. Accepted entries are
        // true achieved min-SINRs, so the trace is nondecreasing either way.
        double unreachable = std::numeric_limits<double>::infinity();
        for (std::size_t it = 0; it < opts.max_inner; it++)
        {
            double target =
                std::isfinite(unreachable) ? 0.5 * (lambda + unreachable) : 2.0 * lambda;
            double t_opt = 0.0;
            arma::mat xi_next = dinkelbach_power_step(inst, assignment, target, &t_opt);
            if (t_opt <= 0.0)
            {
                unreachable = target;
                if (unreachable - lambda <= opts.rel_tol * std::max(lambda, 1e-300))
                {
                    res.converged = true;
                    break;
                }
                continue;
            }
            double fresh = min_sinr(inst, assignment, xi_next);
            if (fresh <= lambda)
            {
                // a truly positive optimum certifies fresh >= target > lambda,
                // so a non-improving point means the certificate was roundoff:
                // mark the probe unreachable and keep shrinking the bracket
                unreachable = std::min(unreachable, target);
                if (unreachable - lambda <= opts.rel_tol * std::max(lambda, 1e-300))
                {
                    res.converged = true;
                    break;
                }
                continue;
            }
            xi = xi_next;
            res.lambda_trace.push_back(fresh);
            res.elapsed_ms.push_back(ms());
            res.iterations++;
            lambda = fresh;
            if (lambda >= sinr_cap() ||
                (std::isfinite(unreachable) && unreachable - lambda <= opts.rel_tol * lambda))
            {
                res.converged = true;
                break;
            }
        }
        power = arma::sqrt(xi);
    }

    // keep powers inside the declared (0, P_max] range
    double floor_mw = 1e-9 * inst.config.max_power_mw;
    power.transform([&](double v) { return std::max(v, floor_mw); });
    res.min_sinr = min_sinr(inst, assignment, arma::square(power));
    res.pilots = PilotConfiguration::make_orthogonal(L, K, init.basis, assignment, power);
    return res;
}

} // namespace pilotforge

#endif
