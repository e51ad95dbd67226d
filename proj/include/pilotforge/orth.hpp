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

#ifndef pilotforge_orth_H
#define pilotforge_orth_H

#include "common.hpp"
#include "estimation.hpp"
#include "fp_core.hpp"
#include "nonorth.hpp"
#include "solvers.hpp"

#include <chrono>
#include <vector>

namespace pilotforge
{

enum class MatchingRule
{
    hungarian, // per-cell maximum-weight matching, keeps pilots distinct in-cell
    linear     // independent per-user argmax (may reuse a pilot within a cell)
};

struct Algo2Options
{
    MatchingRule matching = MatchingRule::hungarian;
    double rel_tol = 1e-6;
    std::size_t max_iters = 100;
};

struct OrthResult
{
    PilotConfiguration pilots;
    IterationTrace trace;
};

// Optimal power for one (user, pilot) pair given the surrogate coefficients
// A = alpha*beta*Re{mu^H phi_s} and B = phi_s^H G phi_s: the contribution
// 2 sqrt(p) A - p B is maximized at sqrt(p) = A/B, clamped to [0, P_max].
inline double candidate_power(double A, double B, double max_power_mw)
{
    if (A <= 0.0)
        return 0.0;
    if (B <= 0.0)
        return max_power_mw; // contribution grows with p when the quadratic term vanishes
    double root = A / B;   // B > 0 but possibly denormal: root*root may round to inf
    return std::min(max_power_mw, root * root);
}

inline double candidate_weight(double p, double A, double B)
{
    return 2.0 * std::sqrt(p) * A - p * B;
}

// Candidate powers and matching weights for every (user, pilot) pair
struct OrthCandidates
{
    arma::mat power; // (L*K) x tau
    arma::mat weight;
};

inline OrthCandidates orth_candidates(const NetworkInstance &inst, const arma::cx_mat &mu,
                                      const arma::mat &weights, const arma::cx_mat &basis)
{
    const std::size_t L = inst.cells(), K = inst.users(), tau = basis.n_rows;
    const double Pmax = inst.config.max_power_mw;
    OrthCandidates cand;
    cand.power.set_size(L * K, tau);
    cand.weight.set_size(L * K, tau);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            arma::cx_mat G(tau, tau, arma::fill::zeros);
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    const arma::cx_vec m = mu.col(user_index(i, j, K));
                    G += (weights(i, j) * inst.beta(i, l, k)) * (m * m.t());
                }
            arma::cx_vec num = basis.t() * mu.col(u); // phi_s^H mu for all s
            arma::cx_mat GB = G * basis;
            for (std::size_t s = 0; s < tau; s++)
            {
                double A = weights(l, k) * inst.beta(l, l, k) * std::real(num(s));
                double B = std::real(arma::cdot(basis.col(s), GB.col(s)));
                double p = candidate_power(A, B, Pmax);
                cand.power(u, s) = p;
                cand.weight(u, s) = candidate_weight(p, A, B);
            }
        }
    return cand;
}

// Per-cell maximum-weight pilot matching; requires K <= tau.
inline arma::umat matching_step(const NetworkInstance &inst, const arma::mat &weight)
{
    const std::size_t L = inst.cells(), K = inst.users(), tau = weight.n_cols;
    if (K > tau)
        throw std::invalid_argument("matching_step: distinct in-cell pilots need K <= tau");
    arma::umat assignment(L, K);
    for (std::size_t l = 0; l < L; l++)
    {
        arma::mat w(K, tau);
        for (std::size_t k = 0; k < K; k++)
            w.row(k) = weight.row(user_index(l, k, K));
        AssignmentResult m = hungarian_max(w);
        for (std::size_t k = 0; k < K; k++)
            assignment(l, k) = m.row_to_col[k];
    }
    return assignment;
}

// Independent per-user argmax over pilots (ties break to the lowest index)
inline arma::umat linear_search_step(const NetworkInstance &inst, const arma::mat &weight)
{
    const std::size_t L = inst.cells(), K = inst.users(), tau = weight.n_cols;
    arma::umat assignment(L, K);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            std::size_t best = 0;
            double bw = weight(u, 0);
            for (std::size_t s = 1; s < tau; s++)
                if (weight(u, s) > bw)
                {
                    bw = weight(u, s);
                    best = s;
                }
            assignment(l, k) = best;
        }
    return assignment;
}

namespace detail
{
// Returned powers must sit in (0, P_max]; a user whose every candidate
// weight was nonpositive carries p = 0 internally and is floored here.
inline arma::mat floor_powers(arma::mat p, double max_power_mw, double floor_scale = 1e-12)
{
    p.transform([&](double v) { return std::max(v, floor_scale * max_power_mw); });
    return p;
}
} // namespace detail

// Alternating optimization over (powers, assignment, auxiliaries) for
// orthogonal pilots. The trace records the true weighted sum MSE.
inline OrthResult run_algorithm2(const NetworkInstance &inst, const arma::mat &weights,
                                 const PilotConfiguration &init, const Algo2Options &opts = {})
{
    if (!init.orthogonal())
        throw std::invalid_argument("run_algorithm2: initialization must be orthogonal");
    const std::size_t L = inst.cells(), K = inst.users(), tau = init.tau;
    if (opts.matching == MatchingRule::hungarian && K > tau)
        throw std::invalid_argument("run_algorithm2: distinct in-cell pilots need K <= tau");
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    arma::umat assignment = init.assignment;
    arma::mat power = init.power;
    PilotConfiguration work = PilotConfiguration::make_orthogonal(L, K, init.basis, assignment, power);
    IterationTrace trace;
    trace.option = (opts.matching == MatchingRule::hungarian) ? "hungarian" : "linear";
    double obj = mse_uncorrelated(inst, work, weights).weighted_sum;
    trace.objective.push_back(obj);
    trace.elapsed_ms.push_back(ms());
    const double descent_slack = 1e-10 * obj; // objective scale is set by the initialization

    for (std::size_t it = 0; it < opts.max_iters; it++)
    {
        arma::cx_mat seqs = work.materialize();
        arma::cx_mat mu = aux_uncorrelated(inst, seqs);
        OrthCandidates cand = orth_candidates(inst, mu, weights, init.basis);
        arma::umat next_assignment = (opts.matching == MatchingRule::hungarian)
                                         ? matching_step(inst, cand.weight)
                                         : linear_search_step(inst, cand.weight);
        arma::mat next_power(L, K);
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
                next_power(l, k) = cand.power(user_index(l, k, K), next_assignment(l, k));

        assignment = next_assignment;
        power = next_power;
        work = PilotConfiguration::make_orthogonal(L, K, init.basis, assignment, power);
        double fresh = mse_uncorrelated(inst, work, weights).weighted_sum;
        if (fresh > obj + descent_slack)
            throw numerical_error("run_algorithm2: objective increased");
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
    PilotConfiguration out = PilotConfiguration::make_orthogonal(
        L, K, init.basis, assignment, detail::floor_powers(power, inst.config.max_power_mw));
    return {out, trace};
}

// Correlated-fading variant: candidate coefficients come from the per-user
// (v, Q) pairs; A = Re{phi_s^H v}, B = phi_s^H Q phi_s, p = (A/B)^2 clamped.
inline OrthResult run_algorithm2_correlated(const NetworkInstance &inst, const arma::mat &weights,
                                            const PilotConfiguration &init,
                                            const Algo2Options &opts = {})
{
    if (!inst.config.correlated)
        throw std::invalid_argument("run_algorithm2_correlated: instance lacks correlation matrices");
    if (!init.orthogonal())
        throw std::invalid_argument("run_algorithm2_correlated: initialization must be orthogonal");
    const std::size_t L = inst.cells(), K = inst.users(), tau = init.tau, M = inst.config.antennas;
    if (opts.matching == MatchingRule::hungarian && K > tau)
        throw std::invalid_argument("run_algorithm2_correlated: distinct in-cell pilots need K <= tau");
    auto t0 = std::chrono::steady_clock::now();
    auto ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    arma::umat assignment = init.assignment;
    arma::mat power = init.power;
    PilotConfiguration work = PilotConfiguration::make_orthogonal(L, K, init.basis, assignment, power);
    IterationTrace trace;
    trace.option = (opts.matching == MatchingRule::hungarian) ? "hungarian" : "linear";
    double obj = mse_correlated(inst, work, weights).weighted_sum;
    trace.objective.push_back(obj);
    trace.elapsed_ms.push_back(ms());
    const double descent_slack = 1e-10 * obj; // objective scale is set by the initialization

    for (std::size_t it = 0; it < opts.max_iters; it++)
    {
        arma::cx_mat seqs = work.materialize();
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

        OrthCandidates cand;
        cand.power.set_size(L * K, tau);
        cand.weight.set_size(L * K, tau);
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
            {
                std::size_t u = user_index(l, k, K);
                arma::cx_vec v = assemble_v(inst, Lambda[u], weights, l, k);
                arma::cx_mat Q = assemble_Q(inst, Gram, weights, l, k);
                arma::cx_mat QB = Q * init.basis;
                for (std::size_t s = 0; s < tau; s++)
                {
                    double A = std::real(arma::cdot(init.basis.col(s), v));
                    double B = std::real(arma::cdot(init.basis.col(s), QB.col(s)));
                    double p = candidate_power(A, B, inst.config.max_power_mw);
                    cand.power(u, s) = p;
                    cand.weight(u, s) = candidate_weight(p, A, B);
                }
            }
        arma::umat next_assignment = (opts.matching == MatchingRule::hungarian)
                                         ? matching_step(inst, cand.weight)
                                         : linear_search_step(inst, cand.weight);
        arma::mat next_power(L, K);
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
                next_power(l, k) = cand.power(user_index(l, k, K), next_assignment(l, k));

        assignment = next_assignment;
        power = next_power;
        work = PilotConfiguration::make_orthogonal(L, K, init.basis, assignment, power);
        double fresh = mse_correlated(inst, work, weights).weighted_sum;
        if (fresh > obj + descent_slack)
            throw numerical_error("run_algorithm2_correlated: objective increased");
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
    PilotConfiguration out = PilotConfiguration::make_orthogonal(
        L, K, init.basis, assignment, detail::floor_powers(power, inst.config.max_power_mw));
    return {out, trace};
}

} // namespace pilotforge

#endif
