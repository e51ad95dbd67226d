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

#ifndef pilotforge_pilots_H
#define pilotforge_pilots_H

#include "common.hpp"

#include <set>

namespace pilotforge
{

// Orthonormal-up-to-scale pilot alphabet: tau columns with |col|^2 = tau and
// Gram matrix tau*I (DFT construction, unit-modulus entries).
inline arma::cx_mat dft_basis(std::size_t tau)
{
    if (tau == 0)
        throw std::invalid_argument("dft_basis: tau must be positive");
    arma::cx_mat B(tau, tau);
    const double w = -6.283185307179586476925286766559 / double(tau);
    for (std::size_t m = 0; m < tau; m++)
        for (std::size_t s = 0; s < tau; s++)
            B(m, s) = std::polar(1.0, w * double(m) * double(s));
    return B;
}

// Pilot set of a network: either per-user free sequences in C^tau (subject
// to the energy budget |phi|^2 <= tau*P_max) or an assignment of scaled
// orthogonal basis sequences phi = sqrt(p) * basis_col with p in (0, P_max].
struct PilotConfiguration
{
    enum class Kind
    {
        arbitrary,
        orthogonal
    };

    Kind kind = Kind::arbitrary;
    std::size_t L = 0, K = 0, tau = 0;

    // arbitrary: column user_index(l,k) holds phi_lk (tau x L*K)
    arma::cx_mat phi;

    // orthogonal: basis (tau x tau), pilot index and power per user (L x K)
    arma::cx_mat basis;
    arma::umat assignment;
    arma::mat power;

    static PilotConfiguration make_arbitrary(std::size_t L, std::size_t K, arma::cx_mat sequences)
    {
        if (sequences.n_cols != L * K)
            throw std::invalid_argument("pilots: sequence matrix must have one column per user");
        PilotConfiguration c;
        c.kind = Kind::arbitrary;
        c.L = L;
        c.K = K;
        c.tau = sequences.n_rows;
        c.phi = std::move(sequences);
        return c;
    }

    static PilotConfiguration make_orthogonal(std::size_t L, std::size_t K, arma::cx_mat basis,
                                              arma::umat assignment, arma::mat power)
    {
        PilotConfiguration c;
        c.kind = Kind::orthogonal;
        c.L = L;
        c.K = K;
        c.tau = basis.n_rows;
        if (basis.n_cols != c.tau)
            throw std::invalid_argument("pilots: basis must be square");
        if (assignment.n_rows != L || assignment.n_cols != K || power.n_rows != L || power.n_cols != K)
            throw std::invalid_argument("pilots: assignment and power must be L x K");
        c.basis = std::move(basis);
        c.assignment = std::move(assignment);
        c.power = std::move(power);
        return c;
    }

    bool orthogonal() const { return kind == Kind::orthogonal; }

    // Pilot sequence of user (l,k) as actually transmitted
    arma::cx_vec sequence(std::size_t l, std::size_t k) const
    {
        if (kind == Kind::arbitrary)
            return phi.col(user_index(l, k, K));
        return std::sqrt(power(l, k)) * basis.col(assignment(l, k));
    }

    // All sequences as a tau x (L*K) matrix, column user_index(l,k)
    arma::cx_mat materialize() const
    {
        if (kind == Kind::arbitrary)
            return phi;
        arma::cx_mat out(tau, L * K);
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
                out.col(user_index(l, k, K)) = sequence(l, k);
        return out;
    }

    // Contract checks: energy budget for free sequences; basis orthogonality,
    // power range and (optionally) in-cell distinctness for assigned ones.
    void validate(double max_power_mw, bool require_distinct_in_cell = true) const
    {
        if (L == 0 || K == 0 || tau == 0)
            throw std::invalid_argument("pilots: empty configuration");
        const double budget = tau * max_power_mw;
        if (kind == Kind::arbitrary)
        {
            for (std::size_t u = 0; u < L * K; u++)
            {
                double n = arma::norm(phi.col(u));
                double e = n * n;
                if (e > budget + 1e-9)
                    throw std::invalid_argument("pilots: sequence energy exceeds tau*P_max");
            }
            return;
        }
        arma::cx_mat gram = basis.t() * basis;
        gram.diag() -= cx(double(tau), 0.0);
        if (arma::abs(gram).max() > 1e-9)
            throw std::invalid_argument("pilots: basis Gram matrix must equal tau*I");
        for (std::size_t l = 0; l < L; l++)
        {
            std::set<arma::uword> seen;
            for (std::size_t k = 0; k < K; k++)
            {
                if (assignment(l, k) >= tau)
                    throw std::invalid_argument("pilots: assignment index out of range");
                double p = power(l, k);
                if (!(p > 0.0) || p > max_power_mw * (1.0 + 1e-12))
                    throw std::invalid_argument("pilots: powers must lie in (0, P_max]");
                if (require_distinct_in_cell && !seen.insert(assignment(l, k)).second)
                    throw std::invalid_argument("pilots: pilot reused inside a cell");
            }
        }
    }
};

} // namespace pilotforge

#endif
