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

#ifndef pilotforge_nonorth_H
#define pilotforge_nonorth_H

#include "common.hpp"
#include "estimation.hpp"
#include "fp_core.hpp"
#include "network.hpp"
#include "pilots.hpp"

#include <cassert>
#include <chrono>
#include <string>
#include <vector>

namespace pilotforge
{

struct IterationTrace
{
    std::vector<double> objective;  // true weighted sum MSE, entry 0 = initialization
    std::vector<double> elapsed_ms; // cumulative wall time at each entry
    std::string option;             // update rule that produced the trace
    std::size_t iterations = 0;     // optimization steps taken (trace size - 1)
    bool converged = false;
    bool fallback = false; // a scaled update degenerated and kept the initialization
};

enum class PilotUpdate
{
    lagrange, // exact power multiplier found by bisection
    scaled    // unconstrained solution rescaled into the power budget
};

struct Algo1Options
{
    PilotUpdate update = PilotUpdate::lagrange;
    double rel_tol = 1e-6;
    std::size_t max_iters = 500;
};

struct NonorthResult
{
    PilotConfiguration pilots;
    IterationTrace trace;
};

namespace detail
{

struct HermEig
{
    arma::vec val;
    arma::cx_mat vec;
};

inline HermEig herm_eig(const arma::cx_mat &G)
{
    HermEig e;
    arma::cx_mat S = 0.5 * (G + G.t()); // kill accumulation asymmetry
    if (!arma::eig_sym(e.val, e.vec, S))
        throw numerical_error("herm_eig: Hermitian eigendecomposition failed");
    return e;
}

// || (G + eta I)^{-1} a ||^2 evaluated through the eigenbasis; at eta = 0
// singular directions are treated as the pseudo-inverse limit.
inline double shrunk_norm2(const HermEig &e, const arma::cx_vec &z, double eta)
{
    double cut = 1e-12 * std::max(e.val.max(), 0.0); // relative: G scales with pathloss
    double s = 0.0;
    for (arma::uword i = 0; i < z.n_elem; i++)
    {
        double d = e.val(i) + eta;
        if (eta == 0.0 && e.val(i) <= cut)
            continue; // pseudo-inverse: null directions contribute nothing
        s += std::norm(z(i)) / (d * d);
    }
    return s;
}

inline arma::cx_vec shrunk_solve(const HermEig &e, const arma::cx_vec &z, double eta)
{
    double cut = 1e-12 * std::max(e.val.max(), 0.0);
    arma::cx_vec w(z.n_elem, arma::fill::zeros);
    for (arma::uword i = 0; i < z.n_elem; i++)
    {
        double d = e.val(i) + eta;
        if (eta == 0.0 && e.val(i) <= cut)
            continue;
        w(i) = z(i) / d;
    }
    return e.vec * w;
}

// argmax_phi 2 Re{a^H phi} - phi^H G phi subject to |phi|^2 <= budget,
// via phi(eta) = (G + eta I)^{-1} a and bisection on the multiplier.
inline arma::cx_vec budgeted_quadratic_max(const arma::cx_mat &G, const arma::cx_vec &a,
                                           double budget)
{
    double anorm = arma::norm(a);
    if (anorm == 0.0)
        return arma::cx_vec(a.n_elem, arma::fill::zeros);
    HermEig e = herm_eig(G);
    arma::cx_vec z = e.vec.t() * a;

    if (shrunk_norm2(e, z, 0.0) <= budget)
        return shrunk_solve(e, z, 0.0);

    double hi = anorm / std::sqrt(budget); // guaranteed feasible multiplier
    for (int g = 0; shrunk_norm2(e, z, hi) > budget; g++)
    {
        if (g > 60)
            throw numerical_error("budgeted_quadratic_max: no feasible multiplier bracket");
        hi *= 2.0;
    }
    // bisect to machine precision; hi always stays on the feasible side
    double lo = 0.0;
    for (int it = 0; it < 200; it++)
    {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break; // bracket exhausted double resolution
        (shrunk_norm2(e, z, mid) > budget ? lo : hi) = mid;
    }
    return shrunk_solve(e, z, hi);
}

} // namespace detail

// Auxiliary variables mu_lk = beta_llk D_l^{-1} phi_lk, one column per user
inline arma::cx_mat aux_uncorrelated(const NetworkInstance &inst, const arma::cx_mat &seqs)
{
    const std::size_t L = inst.cells(), K = inst.users();
    arma::cx_mat mu(seqs.n_rows, L * K);
    for (std::size_t l = 0; l < L; l++)
    {
        arma::cx_mat D = pilot_covariance(inst, seqs, l);
        arma::cx_mat sol = detail::hermitian_solve(D, seqs);
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            mu.col(u) = inst.beta(l, l, k) * sol.col(u);
        }
    }
    return mu;
}

// Surrogate objective f(pilots, mu) = sum alpha_lk qt_value(beta_llk phi_lk, D_l, mu_lk)
inline double fp_surrogate(const NetworkInstance &inst, const arma::cx_mat &seqs,
                           const arma::cx_mat &mu, const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users();
    double f = 0.0;
    for (std::size_t l = 0; l < L; l++)
    {
        arma::cx_mat D = pilot_covariance(inst, seqs, l);
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            arma::cx_vec a = inst.beta(l, l, k) * seqs.col(u);
            f += weights(l, k) * qt_value(a, D, mu.col(u));
        }
    }
    return f;
}

// One pilot block update at fixed auxiliaries: phi_lk maximizes the
// user-separable surrogate under |phi|^2 <= tau*P_max (exact multiplier).
inline arma::cx_mat update_pilots_lagrange(const NetworkInstance &inst, const arma::cx_mat &mu,
                                           const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users(), tau = mu.n_rows;
    const double budget = double(tau) * inst.config.max_power_mw;
    arma::cx_mat out(tau, L * K);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            arma::cx_mat G(tau, tau, arma::fill::zeros);
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    const arma::cx_vec m = mu.col(user_index(i, j, K));
                    G += (weights(i, j) * inst.beta(i, l, k)) * (m * m.t());
                }
            arma::cx_vec a = weights(l, k) * inst.beta(l, l, k) * mu.col(user_index(l, k, K));
            out.col(user_index(l, k, K)) = detail::budgeted_quadratic_max(G, a, budget);
        }
    return out;
}

// Noise-free variant: unconstrained maximizers jointly rescaled by the
// largest factor that keeps every user inside the power budget. Returns an
// empty matrix when every tentative pilot degenerates to zero.
inline arma::cx_mat update_pilots_scaled(const NetworkInstance &inst, const arma::cx_mat &mu,
                                         const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users(), tau = mu.n_rows;
    const double budget = double(tau) * inst.config.max_power_mw;
    arma::cx_mat out(tau, L * K);
    double delta = arma::datum::inf;
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            arma::cx_mat G(tau, tau, arma::fill::zeros);
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    const arma::cx_vec m = mu.col(user_index(i, j, K));
                    G += (weights(i, j) * inst.beta(i, l, k)) * (m * m.t());
                }
            arma::cx_vec a = weights(l, k) * inst.beta(l, l, k) * mu.col(user_index(l, k, K));
            detail::HermEig e = detail::herm_eig(G);
            arma::cx_vec tentative = detail::shrunk_solve(e, arma::cx_vec(e.vec.t() * a), 0.0);
            double n = arma::norm(tentative);
            if (n > 0.0)
                delta = std::min(delta, std::sqrt(budget) / n);
            out.col(user_index(l, k, K)) = tentative;
        }
    if (!std::isfinite(delta))
        return arma::cx_mat(); // all-zero tentative set, caller falls back
    return delta * out;
}

// Alternating pilot design for free (nonorthogonal) sequences. The traced
// objective is the true weighted sum MSE recomputed from scratch each
// iteration; a monotonicity breach raises numerical_error.
inline NonorthResult run_algorithm1(const NetworkInstance &inst, const arma::mat &weights,
                                    const PilotConfiguration &init, const Algo1Options &opts = {})
{
    const std::size_t L = inst.cells(), K = inst.users();
    const double budget = double(init.tau) * inst.config.max_power_mw;
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    arma::cx_mat seqs = init.materialize();
    PilotConfiguration work = PilotConfiguration::make_arbitrary(L, K, seqs);
    IterationTrace trace;
    trace.option = (opts.update == PilotUpdate::lagrange) ? "lagrange" : "scaled";
    double obj = mse_uncorrelated(inst, work, weights).weighted_sum;
    trace.objective.push_back(obj);
    trace.elapsed_ms.push_back(ms());
    const double descent_slack = 1e-10 * obj; // objective scale is set by the initialization

    for (std::size_t it = 0; it < opts.max_iters; it++)
    {
        arma::cx_mat mu = aux_uncorrelated(inst, seqs);
#ifndef NDEBUG
        {
            // the surrogate is tight at the fresh auxiliaries
            double captured = 0.0;
            for (std::size_t l = 0; l < L; l++)
                for (std::size_t k = 0; k < K; k++)
                {
                    std::size_t u = user_index(l, k, K);
                    captured += weights(l, k) *
                                std::real(arma::cdot(seqs.col(u), mu.col(u))) * inst.beta(l, l, k);
                }
            double f = fp_surrogate(inst, seqs, mu, weights);
            assert(std::abs(f - captured) <= 1e-8 * std::abs(captured) + 1e-300);
        }
#endif
        arma::cx_mat next = (opts.update == PilotUpdate::lagrange)
                                ? update_pilots_lagrange(inst, mu, weights)
                                : update_pilots_scaled(inst, mu, weights);
        if (next.n_elem == 0)
        {
            trace.fallback = true;
            break;
        }
        for (arma::uword u = 0; u < next.n_cols; u++)
        {
            double n = arma::norm(next.col(u));
            if (n * n > budget * (1.0 + 1e-9))
                throw numerical_error("run_algorithm1: pilot update violated the power budget");
        }
        PilotConfiguration cand = PilotConfiguration::make_arbitrary(L, K, next);
        double fresh = mse_uncorrelated(inst, cand, weights).weighted_sum;
        if (fresh > obj + descent_slack)
        {
            // the multiplier update provably descends; the rescaled one only
            // does in the vanishing-noise limit — reject its step and stop
            if (opts.update == PilotUpdate::lagrange)
                throw numerical_error("run_algorithm1: objective increased");
            break;
        }
        seqs = next;
        work = cand;
        trace.objective.push_back(fresh);
        trace.elapsed_ms.push_back(ms());
        trace.iterations = it + 1;
        bool done = std::abs(obj - fresh) <= opts.rel_tol * std::max(std::abs(obj), 1e-300);
        obj = fresh;
        if (done)
        {
            trace.converged = true;
            break;
        }
    }
    return {PilotConfiguration::make_arbitrary(L, K, seqs), trace};
}

// Correlated-fading variant: matrix auxiliaries Lambda_lk = U_l^{-1} W_lk^H,
// per-user coefficients (v, Q), same budgeted update rules on (Q, v).
inline NonorthResult run_algorithm1_correlated(const NetworkInstance &inst, const arma::mat &weights,
                                               const PilotConfiguration &init,
                                               const Algo1Options &opts = {})
{
    if (!inst.config.correlated)
        throw std::invalid_argument("run_algorithm1_correlated: instance lacks correlation matrices");
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    const std::size_t tau = init.tau;
    const double budget = double(tau) * inst.config.max_power_mw;
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    arma::cx_mat seqs = init.materialize();
    PilotConfiguration work = PilotConfiguration::make_arbitrary(L, K, seqs);
    IterationTrace trace;
    trace.option = (opts.update == PilotUpdate::lagrange) ? "lagrange" : "scaled";
    double obj = mse_correlated(inst, work, weights).weighted_sum;
    trace.objective.push_back(obj);
    trace.elapsed_ms.push_back(ms());
    const double descent_slack = 1e-10 * obj; // objective scale is set by the initialization

    for (std::size_t it = 0; it < opts.max_iters; it++)
    {
        // fresh auxiliaries and their Gram products (one per user)
        std::vector<arma::cx_mat> Lambda(L * K), Gram(L * K);
        for (std::size_t l = 0; l < L; l++)
        {
            arma::cx_mat U = pilot_covariance_corr(inst, seqs, l);
            arma::cx_mat rhs(tau * M, K * M);
            for (std::size_t k = 0; k < K; k++)
            {
                arma::cx_mat W = inst.beta(l, l, k) *
                                 arma::kron(seqs.col(user_index(l, k, K)).t(), inst.cov(l, l, k));
                rhs.cols(k * M, (k + 1) * M - 1) = W.t();
            }
            arma::cx_mat sol = detail::hermitian_solve(U, rhs);
            for (std::size_t k = 0; k < K; k++)
            {
                std::size_t u = user_index(l, k, K);
                Lambda[u] = sol.cols(k * M, (k + 1) * M - 1);
                Gram[u] = Lambda[u] * Lambda[u].t();
            }
        }

        arma::cx_mat next(tau, L * K);
        double delta = arma::datum::inf;
        bool any_nonzero = false;
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
            {
                std::size_t u = user_index(l, k, K);
                arma::cx_vec v = assemble_v(inst, Lambda[u], weights, l, k);
                arma::cx_mat Q = assemble_Q(inst, Gram, weights, l, k);
                if (opts.update == PilotUpdate::lagrange)
                    next.col(u) = detail::budgeted_quadratic_max(Q, v, budget);
                else
                {
                    detail::HermEig e = detail::herm_eig(Q);
                    arma::cx_vec tentative =
                        detail::shrunk_solve(e, arma::cx_vec(e.vec.t() * v), 0.0);
                    double n = arma::norm(tentative);
                    if (n > 0.0)
                    {
                        delta = std::min(delta, std::sqrt(budget) / n);
                        any_nonzero = true;
                    }
                    next.col(u) = tentative;
                }
            }
        if (opts.update == PilotUpdate::scaled)
        {
            if (!any_nonzero)
            {
                trace.fallback = true;
                break;
            }
            next *= delta;
        }
        for (arma::uword u = 0; u < next.n_cols; u++)
        {
            double n = arma::norm(next.col(u));
            if (n * n > budget * (1.0 + 1e-9))
                throw numerical_error("run_algorithm1_correlated: pilot update violated the power budget");
        }
        PilotConfiguration cand = PilotConfiguration::make_arbitrary(L, K, next);
        double fresh = mse_correlated(inst, cand, weights).weighted_sum;
        if (fresh > obj + descent_slack)
        {
            // see run_algorithm1: only the multiplier update is guaranteed to descend
            if (opts.update == PilotUpdate::lagrange)
                throw numerical_error("run_algorithm1_correlated: objective increased");
            break;
        }
        seqs = next;
        work = cand;
        trace.objective.push_back(fresh);
        trace.elapsed_ms.push_back(ms());
        trace.iterations = it + 1;
        bool done = std::abs(obj - fresh) <= opts.rel_tol * std::max(std::abs(obj), 1e-300);
        obj = fresh;
        if (done)
        {
            trace.converged = true;
            break;
        }
    }
    return {PilotConfiguration::make_arbitrary(L, K, seqs), trace};
}

} // namespace pilotforge

#endif
