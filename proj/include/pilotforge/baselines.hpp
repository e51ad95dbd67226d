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

#ifndef pilotforge_baselines_H
#define pilotforge_baselines_H

#include "common.hpp"
#include "network.hpp"
#include "pilots.hpp"
#include "rng.hpp"

#include <numeric>
#include <vector>

namespace pilotforge
{

// Random orthogonal reference: each cell draws K distinct pilots out of tau
// (uniform subset, uniform order) and transmits at full power.
inline PilotConfiguration baseline_orthogonal(const NetworkInstance &inst, std::size_t tau,
                                              StreamRng &rng)
{
    const std::size_t L = inst.cells(), K = inst.users();
    if (K > tau)
        throw std::invalid_argument("baseline_orthogonal: needs K <= tau");
    arma::umat assignment(L, K);
    for (std::size_t l = 0; l < L; l++)
    {
        std::vector<std::size_t> perm(tau);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = 0; k < K; k++) // partial Fisher-Yates
        {
            std::size_t r = k + std::size_t(rng.below(tau - k));
            std::swap(perm[k], perm[r]);
            assignment(l, k) = perm[k];
        }
    }
    arma::mat power(L, K);
    power.fill(inst.config.max_power_mw);
    return PilotConfiguration::make_orthogonal(L, K, dft_basis(tau), assignment, power);
}

// Unstructured reference: i.i.d. complex Gaussian sequences scaled onto the
// power budget sphere |phi|^2 = tau * P_max.
inline PilotConfiguration baseline_random(const NetworkInstance &inst, std::size_t tau,
                                          StreamRng &rng)
{
    const std::size_t L = inst.cells(), K = inst.users();
    const double target = std::sqrt(double(tau) * inst.config.max_power_mw);
    arma::cx_mat seqs(tau, L * K);
    for (std::size_t u = 0; u < L * K; u++)
    {
        arma::cx_vec v(tau);
        for (std::size_t m = 0; m < tau; m++)
            v(m) = rng.cnormal();
        double n = arma::norm(v);
        if (n == 0.0)
        {
            v.zeros();
            v(0) = 1.0;
            n = 1.0;
        }
        seqs.col(u) = (target / n) * v;
    }
    return PilotConfiguration::make_arbitrary(L, K, seqs);
}

// Contamination-free estimation floor: per-user MSE when the pilot is
// orthogonal to every other transmission and runs at the full budget.
struct LowerBound
{
    arma::mat per_user; // L x K
    double weighted_sum = 0.0;
};

inline LowerBound lower_bound_mse(const NetworkInstance &inst, std::size_t tau,
                                  const arma::mat &weights)
{
    const std::size_t L = inst.cells(), K = inst.users(), M = inst.config.antennas;
    const double s2 = inst.config.noise_power_mw;
    const double e = double(tau) * inst.config.max_power_mw;
    LowerBound lb;
    lb.per_user.set_size(L, K);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            double b = inst.beta(l, l, k);
            lb.per_user(l, k) = double(M) * b * s2 / (s2 + b * e);
            lb.weighted_sum += weights(l, k) * lb.per_user(l, k);
        }
    return lb;
}

// Weight presets for the design objective
inline arma::mat make_weights(const NetworkInstance &inst, const std::string &preset)
{
    const std::size_t L = inst.cells(), K = inst.users();
    arma::mat w(L, K, arma::fill::ones);
    if (preset == "unit")
        return w;
    if (preset == "normalized")
    {
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
                w(l, k) = 1.0 / inst.beta(l, l, k);
        return w;
    }
    throw std::invalid_argument("make_weights: unknown preset '" + preset + "'");
}

} // namespace pilotforge

#endif
