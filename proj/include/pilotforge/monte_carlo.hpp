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

#ifndef pilotforge_monte_carlo_H
#define pilotforge_monte_carlo_H

#include "common.hpp"
#include "estimation.hpp"
#include "network.hpp"
#include "pilots.hpp"
#include "rng.hpp"

#include <vector>

namespace pilotforge
{

namespace detail
{

// PSD square root through the Hermitian eigenbasis (tiny negative
// eigenvalues from roundoff are clipped to zero)
inline arma::cx_mat psd_sqrt(const arma::cx_mat &R)
{
    arma::vec val;
    arma::cx_mat vec;
    if (!arma::eig_sym(val, vec, 0.5 * (R + R.t())))
        throw numerical_error("psd_sqrt: eigendecomposition failed");
    val.transform([](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
    return vec * arma::diagmat(val) * vec.t();
}

// One received pilot block at base station l plus the true in-cell channels.
// sqrts[u] is empty for uncorrelated links.
inline void draw_pilot_block(const NetworkInstance &inst, const arma::cx_mat &seqs, std::size_t l,
                             const std::vector<arma::cx_mat> &sqrts, StreamRng &rng,
                             arma::cx_mat &Y, arma::cx_mat &H)
{
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    const std::size_t tau = seqs.n_rows;
    const double noise_sd = std::sqrt(inst.config.noise_power_mw);
    H.set_size(M, L * K);
    for (std::size_t i = 0; i < L; i++)
        for (std::size_t j = 0; j < K; j++)
        {
            std::size_t u = user_index(i, j, K);
            arma::cx_vec g(M);
            for (std::size_t m = 0; m < M; m++)
                g(m) = rng.cnormal();
            if (!sqrts.empty() && sqrts[u].n_elem > 0)
                g = sqrts[u] * g;
            H.col(u) = std::sqrt(inst.beta(l, i, j)) * g;
        }
    Y.set_size(M, tau);
    for (std::size_t m = 0; m < M; m++)
        for (std::size_t t = 0; t < tau; t++)
            Y(m, t) = noise_sd * rng.cnormal();
    Y += H * arma::strans(seqs); // sum_u h_u phi_u^T
}

inline std::vector<arma::cx_mat> link_sqrts(const NetworkInstance &inst, std::size_t l)
{
    const std::size_t L = inst.cells(), K = inst.users();
    std::vector<arma::cx_mat> s(L * K);
    if (inst.config.correlated && inst.cov.n_elem > 0)
        for (std::size_t i = 0; i < L; i++)
            for (std::size_t j = 0; j < K; j++)
                s[user_index(i, j, K)] = psd_sqrt(inst.cov(l, i, j));
    return s;
}

} // namespace detail

// Empirical covariance of the pilot observations at base station l,
// averaged over draws and antennas (each antenna row is an i.i.d. replica).
inline arma::cx_mat pilot_covariance_monte_carlo(const NetworkInstance &inst,
                                                 const PilotConfiguration &pilots, std::size_t l,
                                                 std::size_t draws, StreamRng &rng)
{
    const arma::cx_mat seqs = pilots.materialize();
    const std::size_t tau = seqs.n_rows, M = inst.config.antennas;
    auto sqrts = detail::link_sqrts(inst, l);
    arma::cx_mat acc(tau, tau, arma::fill::zeros);
    arma::cx_mat Y, H;
    for (std::size_t d = 0; d < draws; d++)
    {
        detail::draw_pilot_block(inst, seqs, l, sqrts, rng, Y, H);
        acc += arma::strans(Y) * arma::conj(Y); // sum over antenna rows of y_m y_m^H
    }
    return acc / double(draws * M);
}

// Empirical per-user estimation error E|h - hhat|^2 at base station l
inline arma::vec mse_monte_carlo(const NetworkInstance &inst, const PilotConfiguration &pilots,
                                 std::size_t l, std::size_t draws, StreamRng &rng)
{
    const std::size_t K = inst.users();
    const arma::cx_mat seqs = pilots.materialize();
    auto sqrts = detail::link_sqrts(inst, l);
    arma::vec acc(K, arma::fill::zeros);
    arma::cx_mat Y, H;
    const bool corr = inst.config.correlated && inst.cov.n_elem > 0;
    for (std::size_t d = 0; d < draws; d++)
    {
        detail::draw_pilot_block(inst, seqs, l, sqrts, rng, Y, H);
        arma::cx_mat est = corr ? mmse_estimate_corr(inst, pilots, l, Y)
                                : mmse_estimate(inst, pilots, l, Y);
        for (std::size_t k = 0; k < K; k++)
        {
            arma::cx_vec e = est.col(k) - H.col(user_index(l, k, K));
            acc(k) += std::real(arma::cdot(e, e));
        }
    }
    return acc / double(draws);
}

// Use-and-then-forget rate estimate for user (l,k): channels, pilot noise,
// data symbols and receive noise are simulated; the receiver applies
// maximum-ratio combining with the MMSE channel estimate and treats the
// mean effective gain as the known part of the signal.
inline double rate_monte_carlo(const NetworkInstance &inst, const PilotConfiguration &pilots,
                               std::size_t l, std::size_t k, std::size_t draws, StreamRng &rng,
                               double data_power = 1.0)
{
    const std::size_t L = inst.cells(), K = inst.users();
    const arma::cx_mat seqs = pilots.materialize();
    const double noise_sd = std::sqrt(inst.config.noise_power_mw);
    auto sqrts = detail::link_sqrts(inst, l);
    const bool corr = inst.config.correlated && inst.cov.n_elem > 0;

    // the combining vector is linear in Y, so the estimate for user k only
    // needs D^{-1} phi (or W U^{-1}) once
    cx gain_acc = 0.0;
    double rx2_acc = 0.0;
    arma::cx_mat Y, H;
    for (std::size_t d = 0; d < draws; d++)
    {
        detail::draw_pilot_block(inst, seqs, l, sqrts, rng, Y, H);
        arma::cx_vec hhat;
        if (corr)
            hhat = mmse_estimate_corr(inst, pilots, l, Y).col(k);
        else
            hhat = mmse_estimate(inst, pilots, l, Y).col(k);

        arma::cx_vec rx(inst.config.antennas);
        for (arma::uword m = 0; m < rx.n_elem; m++)
            rx(m) = noise_sd * rng.cnormal();
        arma::cx_vec x(L * K);
        for (std::size_t u = 0; u < L * K; u++)
            x(u) = std::sqrt(data_power) * rng.cnormal();
        rx += H * x;

        cx combined = arma::cdot(hhat, rx);
        gain_acc += arma::cdot(hhat, H.col(user_index(l, k, K)));
        rx2_acc += std::norm(combined);
    }
    cx mu = gain_acc / double(draws);
    double rx2 = rx2_acc / double(draws);
    double signal = std::norm(mu) * data_power;
    double interference = rx2 - signal;
    if (signal <= 0.0)
        return 0.0;
    if (interference <= 0.0)
        return rate_cap_bits;
    return std::min(std::log2(1.0 + signal / interference), rate_cap_bits);
}

} // namespace pilotforge

#endif
