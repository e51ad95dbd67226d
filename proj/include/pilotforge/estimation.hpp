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

#ifndef pilotforge_estimation_H
#define pilotforge_estimation_H

#include "common.hpp"
#include "network.hpp"
#include "pilots.hpp"

#include <vector>

namespace pilotforge
{

namespace detail
{

// Hermitian solve via Cholesky; adds diagonal jitter only if the plain
// factorization fails (near-singular covariance).
inline arma::cx_mat hermitian_solve(const arma::cx_mat &A, const arma::cx_mat &B)
{
    arma::cx_mat U;
    if (arma::chol(U, A))
        return arma::solve(arma::trimatu(U), arma::solve(arma::trimatl(U.t()), B));
    arma::cx_mat J = A;
    double dmax = arma::abs(A.diag()).max();
    double bump = 1e-12 * (dmax > 0.0 ? dmax : 1.0); // relative: A scales with pathloss
    J.diag() += cx(bump, 0.0);
    if (!arma::chol(U, J))
        throw numerical_error("hermitian_solve: Cholesky failed even with jitter");
    return arma::solve(arma::trimatu(U), arma::solve(arma::trimatl(U.t()), B));
}

} // namespace detail

// Covariance of each pilot-slot observation at base station l:
// D_l = sigma^2 I_tau + sum_(i,j) beta(l,i,j) phi_ij phi_ij^H
inline arma::cx_mat pilot_covariance(const NetworkInstance &inst, const arma::cx_mat &seqs,
                                     std::size_t l)
{
    const std::size_t tau = seqs.n_rows, L = inst.cells(), K = inst.users();
    if (seqs.n_cols != L * K)
        throw std::invalid_argument("pilot_covariance: one sequence column per user required");
    arma::cx_mat D(tau, tau, arma::fill::eye);
    D *= inst.config.noise_power_mw;
    for (std::size_t i = 0; i < L; i++)
        for (std::size_t j = 0; j < K; j++)
        {
            const arma::cx_vec p = seqs.col(user_index(i, j, K));
            D += inst.beta(l, i, j) * (p * p.t());
        }
    return D;
}

// Per-user channel estimation error and the weighted network objective.
struct MseReport
{
    arma::mat per_user;       // L x K
    double weighted_sum = 0.0;
};

// MSE_lk = M * beta_llk - M * beta_llk^2 * phi_lk^H D_l^{-1} phi_lk
inline MseReport mse_uncorrelated(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                  const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    if (weights.n_rows != L || weights.n_cols != K)
        throw std::invalid_argument("mse_uncorrelated: weights must be L x K");
    const arma::cx_mat seqs = pilots.materialize();
    MseReport rep;
    rep.per_user.set_size(L, K);
    for (std::size_t l = 0; l < L; l++)
    {
        arma::cx_mat D = pilot_covariance(inst, seqs, l);
        arma::cx_mat sol = detail::hermitian_solve(D, seqs); // D^{-1} phi for every user
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            double quad = std::real(arma::cdot(seqs.col(u), sol.col(u)));
            double b = inst.beta(l, l, k);
            rep.per_user(l, k) = double(M) * (b - b * b * quad);
            rep.weighted_sum += weights(l, k) * rep.per_user(l, k);
        }
    }
    return rep;
}

// MMSE estimates of the in-cell channels at base station l from the received
// pilot block Y_l (M x tau): hhat_llk = beta_llk * Y_l * conj(D_l^{-1} phi_lk).
// Returns an M x K matrix, one column per in-cell user.
inline arma::cx_mat mmse_estimate(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                  std::size_t l, const arma::cx_mat &Y)
{
    const std::size_t K = inst.users(), M = inst.config.antennas;
    const arma::cx_mat seqs = pilots.materialize();
    if (Y.n_rows != M || Y.n_cols != seqs.n_rows)
        throw std::invalid_argument("mmse_estimate: Y must be M x tau");
    arma::cx_mat D = pilot_covariance(inst, seqs, l);
    arma::cx_mat out(M, K);
    for (std::size_t k = 0; k < K; k++)
    {
        std::size_t u = user_index(l, k, K);
        arma::cx_vec c = detail::hermitian_solve(D, arma::cx_mat(seqs.col(u)));
        out.col(k) = inst.beta(l, l, k) * (Y * arma::conj(c));
    }
    return out;
}

// Finite-antenna achievable rates (maximum-ratio combining, unit-power data
// symbols). Degenerate denominators (< 1e-15) are flagged and the rate is
// reported at the cap.
struct RateReport
{
    arma::mat per_user; // L x K, bits/s/Hz
    arma::umat capped;  // 1 where the denominator degenerated or SINR hit the cap
    double min_rate = 0.0;
    double sum_rate = 0.0;
};

inline RateReport rate_finite(const NetworkInstance &inst, const PilotConfiguration &pilots)
{
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    const arma::cx_mat seqs = pilots.materialize();
    RateReport rep;
    rep.per_user.set_size(L, K);
    rep.capped.zeros(L, K);
    for (std::size_t l = 0; l < L; l++)
    {
        arma::cx_mat D = pilot_covariance(inst, seqs, l);
        arma::cx_mat sol = detail::hermitian_solve(D, seqs);
        double rx_power = inst.config.noise_power_mw;
        for (std::size_t i = 0; i < L; i++)
            for (std::size_t j = 0; j < K; j++)
                rx_power += inst.beta(l, i, j);
        for (std::size_t k = 0; k < K; k++)
        {
            std::size_t u = user_index(l, k, K);
            double b = inst.beta(l, l, k);
            double t = std::real(arma::cdot(seqs.col(u), sol.col(u)));
            double cross = 0.0;
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    double bij = inst.beta(l, i, j);
                    double c = std::abs(arma::cdot(seqs.col(u), sol.col(user_index(i, j, K))));
                    cross += bij * bij * c * c;
                }
            double num = b * b * t * t;
            double den = rx_power * t / double(M) + cross - num;
            double rate;
            if (den < 1e-15)
            {
                rep.capped(l, k) = 1;
                rate = rate_cap_bits;
            }
            else
            {
                rate = std::log2(1.0 + num / den);
                if (rate > rate_cap_bits)
                {
                    rep.capped(l, k) = 1;
                    rate = rate_cap_bits;
                }
            }
            rep.per_user(l, k) = rate;
        }
    }
    rep.min_rate = rep.per_user.min();
    rep.sum_rate = arma::accu(rep.per_user);
    return rep;
}

// Asymptotic (antenna count -> infinity) rates for orthogonal pilot
// configurations: SINR = beta^2 p^2 / sum over co-pilot users of beta^2 p^2.
// Users without a co-pilot interferer are reported at the cap.
inline RateReport rate_asymptotic(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                  double cap_bits = rate_cap_bits)
{
    if (!pilots.orthogonal())
        throw std::invalid_argument("rate_asymptotic: requires an orthogonal configuration");
    const std::size_t L = inst.cells(), K = inst.users();
    RateReport rep;
    rep.per_user.set_size(L, K);
    rep.capped.zeros(L, K);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            double b = inst.beta(l, l, k);
            double own = b * b * pilots.power(l, k) * pilots.power(l, k);
            double interf = 0.0;
            for (std::size_t i = 0; i < L; i++)
                for (std::size_t j = 0; j < K; j++)
                {
                    if (i == l && j == k)
                        continue;
                    if (pilots.assignment(i, j) != pilots.assignment(l, k))
                        continue;
                    double bij = inst.beta(l, i, j);
                    interf += bij * bij * pilots.power(i, j) * pilots.power(i, j);
                }
            double rate;
            if (interf <= 0.0)
            {
                rep.capped(l, k) = 1;
                rate = cap_bits;
            }
            else
            {
                rate = std::log2(1.0 + own / interf);
                if (rate > cap_bits)
                {
                    rep.capped(l, k) = 1;
                    rate = cap_bits;
                }
            }
            rep.per_user(l, k) = rate;
        }
    rep.min_rate = rep.per_user.min();
    rep.sum_rate = arma::accu(rep.per_user);
    return rep;
}

// ---- correlated fading -------------------------------------------------

// U_l = sigma^2 I_(tau*M) + sum_(i,j) beta(l,i,j) (phi_ij phi_ij^H) kron R(l,i,j)
inline arma::cx_mat pilot_covariance_corr(const NetworkInstance &inst, const arma::cx_mat &seqs,
                                          std::size_t l)
{
    if (!inst.config.correlated || inst.cov.n_elem == 0)
        throw std::invalid_argument("pilot_covariance_corr: instance lacks correlation matrices");
    const std::size_t tau = seqs.n_rows, M = inst.config.antennas;
    const std::size_t L = inst.cells(), K = inst.users();
    arma::cx_mat U(tau * M, tau * M, arma::fill::eye);
    U *= inst.config.noise_power_mw;
    for (std::size_t i = 0; i < L; i++)
        for (std::size_t j = 0; j < K; j++)
        {
            const arma::cx_vec p = seqs.col(user_index(i, j, K));
            U += inst.beta(l, i, j) * arma::kron(p * p.t(), inst.cov(l, i, j));
        }
    return U;
}

// MSE_lk = beta_llk tr(R_llk) - tr(W U_l^{-1} W^H) with W = beta_llk (phi^H kron R_llk)
inline MseReport mse_correlated(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users();
    if (weights.n_rows != L || weights.n_cols != K)
        throw std::invalid_argument("mse_correlated: weights must be L x K");
    const arma::cx_mat seqs = pilots.materialize();
    MseReport rep;
    rep.per_user.set_size(L, K);
    const std::size_t M = inst.config.antennas, tau = seqs.n_rows;
    for (std::size_t l = 0; l < L; l++)
    {
        arma::cx_mat U = pilot_covariance_corr(inst, seqs, l);
        arma::cx_mat rhs(tau * M, K * M); // stacked W_lk^H, one factorization per cell
        std::vector<arma::cx_mat> W(K);
        for (std::size_t k = 0; k < K; k++)
        {
            W[k] = inst.beta(l, l, k) * arma::kron(seqs.col(user_index(l, k, K)).t(), inst.cov(l, l, k));
            rhs.cols(k * M, (k + 1) * M - 1) = W[k].t();
        }
        arma::cx_mat sol = detail::hermitian_solve(U, rhs);
        for (std::size_t k = 0; k < K; k++)
        {
            double captured = std::real(arma::trace(W[k] * sol.cols(k * M, (k + 1) * M - 1)));
            rep.per_user(l, k) = inst.beta(l, l, k) * std::real(arma::trace(inst.cov(l, l, k))) - captured;
            rep.weighted_sum += weights(l, k) * rep.per_user(l, k);
        }
    }
    return rep;
}

// Correlated MMSE estimates at base station l: hhat_llk = W U^{-1} vec(Y)
inline arma::cx_mat mmse_estimate_corr(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                       std::size_t l, const arma::cx_mat &Y)
{
    const std::size_t K = inst.users(), M = inst.config.antennas;
    const arma::cx_mat seqs = pilots.materialize();
    if (Y.n_rows != M || Y.n_cols != seqs.n_rows)
        throw std::invalid_argument("mmse_estimate_corr: Y must be M x tau");
    arma::cx_mat U = pilot_covariance_corr(inst, seqs, l);
    arma::cx_vec y = arma::vectorise(Y);
    arma::cx_vec Uinv_y = detail::hermitian_solve(U, arma::cx_mat(y));
    arma::cx_mat out(M, K);
    for (std::size_t k = 0; k < K; k++)
    {
        double b = inst.beta(l, l, k);
        arma::cx_mat W = b * arma::kron(seqs.col(user_index(l, k, K)).t(), inst.cov(l, l, k));
        out.col(k) = W * Uinv_y;
    }
    return out;
}

} // namespace pilotforge

#endif
