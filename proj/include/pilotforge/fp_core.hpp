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

#ifndef pilotforge_fp_core_H
#define pilotforge_fp_core_H

#include "common.hpp"
#include "estimation.hpp"
#include "network.hpp"

#include <vector>

namespace pilotforge
{

// Quadratic-transform surrogate of the ratio a^H B^{-1} a at auxiliary mu:
// value = 2 Re{a^H mu} - mu^H B mu. Equals the ratio at mu = B^{-1} a and
// lower-bounds it elsewhere (B Hermitian positive definite).
inline double qt_value(const arma::cx_vec &a, const arma::cx_mat &B, const arma::cx_vec &mu)
{
    return 2.0 * std::real(arma::cdot(mu, a)) - std::real(arma::cdot(mu, B * mu));
}

// Maximizing auxiliary for qt_value: mu* = B^{-1} a
inline arma::cx_vec qt_opt_aux(const arma::cx_vec &a, const arma::cx_mat &B)
{
    return detail::hermitian_solve(B, arma::cx_mat(a));
}

// Matrix quadratic transform: tr(2 Re{W Lambda} - Lambda^H U Lambda) is
// maximized over Lambda at Lambda* = U^{-1} W^H.
inline arma::cx_mat matrix_qt_opt_aux(const arma::cx_mat &W, const arma::cx_mat &U)
{
    return detail::hermitian_solve(U, arma::cx_mat(W.t()));
}

inline double matrix_qt_value(const arma::cx_mat &W, const arma::cx_mat &U, const arma::cx_mat &Lambda)
{
    return 2.0 * std::real(arma::trace(W * Lambda)) - std::real(arma::trace(Lambda.t() * U * Lambda));
}

// Trace of a structured Kronecker product against a free matrix without
// materializing the Kronecker factor:
//   tr(((a b^H) kron C) F) = b^H T a
// with a in C^n1, b in C^n2, C in C^(n3 x n4), F in C^(n2*n4 x n1*n3);
//   T(i,j) = sum_m (row m of C) * (rows [i*n4, (i+1)*n4) of F, column j*n3+m)
inline arma::cx_mat kron_trace_reduce(std::size_t n1, std::size_t n2, const arma::cx_mat &C,
                                      const arma::cx_mat &F)
{
    const std::size_t n3 = C.n_rows, n4 = C.n_cols;
    if (F.n_rows != n2 * n4 || F.n_cols != n1 * n3)
        throw std::invalid_argument("kron_trace_reduce: F must be (n2*n4) x (n1*n3)");
    arma::cx_mat T(n2, n1);
    for (std::size_t i = 0; i < n2; i++)
        for (std::size_t j = 0; j < n1; j++)
        {
            cx acc = 0.0;
            for (std::size_t m = 0; m < n3; m++)
                for (std::size_t q = 0; q < n4; q++)
                    acc += C(m, q) * F(i * n4 + q, j * n3 + m);
            T(i, j) = acc;
        }
    return T;
}

// Linear coefficient of the correlated design objective for user (l,k):
// v[s] = alpha_lk * beta_llk * tr(R_llk * (rows block s of Lambda_lk))
inline arma::cx_vec assemble_v(const NetworkInstance &inst, const arma::cx_mat &Lambda,
                               const arma::mat &weights, std::size_t l, std::size_t k)
{
    const std::size_t M = inst.config.antennas;
    const std::size_t tau = Lambda.n_rows / M;
    if (Lambda.n_rows != tau * M || Lambda.n_cols != M)
        throw std::invalid_argument("assemble_v: Lambda must be (tau*M) x M");
    const arma::cx_mat &R = inst.cov(l, l, k);
    const double c = weights(l, k) * inst.beta(l, l, k);
    arma::cx_vec v(tau);
    for (std::size_t s = 0; s < tau; s++)
        v(s) = c * arma::trace(R * Lambda.rows(s * M, (s + 1) * M - 1));
    return v;
}

// Quadratic coefficient of the correlated design objective for user (l,k):
// Q(s,t) = sum_(i,j) alpha_ij * beta(i,l,k) * tr(R(i,l,k) * block(s,t) of Lambda_ij Lambda_ij^H).
// Gram products Lambda Lambda^H are passed in precomputed (one per user).
inline arma::cx_mat assemble_Q(const NetworkInstance &inst,
                               const std::vector<arma::cx_mat> &LambdaGram,
                               const arma::mat &weights, std::size_t l, std::size_t k)
{
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    if (LambdaGram.size() != L * K)
        throw std::invalid_argument("assemble_Q: one Gram matrix per user required");
    const std::size_t tau = LambdaGram[0].n_rows / M;
    arma::cx_mat Q(tau, tau, arma::fill::zeros);
    for (std::size_t i = 0; i < L; i++)
        for (std::size_t j = 0; j < K; j++)
        {
            const arma::cx_mat &G = LambdaGram[user_index(i, j, K)];
            const arma::cx_mat &R = inst.cov(i, l, k);
            const double c = weights(i, j) * inst.beta(i, l, k);
            for (std::size_t s = 0; s < tau; s++)
                for (std::size_t t = 0; t < tau; t++)
                    Q(s, t) += c * arma::trace(R * G.submat(s * M, t * M, (s + 1) * M - 1,
                                                            (t + 1) * M - 1));
        }
    return Q;
}

} // namespace pilotforge

#endif
