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

#ifndef pilotforge_validate_H
#define pilotforge_validate_H

#include "baselines.hpp"
#include "estimation.hpp"
#include "fp_core.hpp"
#include "monte_carlo.hpp"
#include "network.hpp"
#include "solvers.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace pilotforge
{

// Small-network configuration for fuzzing and statistical checks; geometry
// and fading parameters follow the defaults, only the sizes shrink.
inline NetworkConfig small_config(std::size_t L, std::size_t K, std::size_t M, std::size_t tau,
                                  bool correlated, std::uint64_t seed)
{
    NetworkConfig cfg;
    cfg.cells = L;
    cfg.users_per_cell = K;
    cfg.antennas = M;
    cfg.pilot_len = tau;
    cfg.correlated = correlated;
    cfg.seed = seed;
    return cfg;
}

inline arma::cx_vec random_cx_vec(StreamRng &rng, std::size_t n)
{
    arma::cx_vec v(n);
    for (auto &x : v)
        x = rng.cnormal();
    return v;
}

inline arma::cx_mat random_cx_mat(StreamRng &rng, std::size_t r, std::size_t c)
{
    arma::cx_mat m(r, c);
    for (auto &x : m)
        x = rng.cnormal();
    return m;
}

// Hermitian positive definite matrix A A^H + n I
inline arma::cx_mat random_hpd(StreamRng &rng, std::size_t n)
{
    arma::cx_mat A = random_cx_mat(rng, n, n);
    return A * A.t() + double(n) * arma::eye<arma::cx_mat>(n, n);
}

struct CheckResult
{
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double tolerance = 0.0;
};

namespace detail
{

inline void push_check(std::vector<CheckResult> &out, const std::string &name, double observed,
                       double tolerance)
{
    out.push_back({name, observed <= tolerance, observed, tolerance});
}

} // namespace detail

// Self-contained oracle suite behind the `validate` CLI verb: exact algebraic
// identities at tight tolerances plus statistical agreement between closed
// forms and simulation at Monte Carlo tolerances.
inline std::vector<CheckResult> run_validation(std::uint64_t seed = 7)
{
    std::vector<CheckResult> out;
    StreamRng rng(seed, stream::monte_carlo);

    // quadratic transform tightness: value at the optimal auxiliary equals a^H B^{-1} a
    {
        double worst = 0.0;
        for (int rep = 0; rep < 20; rep++)
        {
            std::size_t n = 2 + rng.below(6);
            arma::cx_mat B = random_hpd(rng, n);
            arma::cx_vec a = random_cx_vec(rng, n);
            arma::cx_vec mu = qt_opt_aux(a, B);
            double direct = std::real(arma::cdot(a, arma::solve(B, a)));
            worst = std::max(worst, std::abs(qt_value(a, B, mu) - direct) /
                                        std::max(1.0, std::abs(direct)));
        }
        detail::push_check(out, "quadratic_transform_tightness", worst, 1e-10);
    }

    // matrix transform tightness: value at Lambda* equals tr(W U^{-1} W^H)
    {
        double worst = 0.0;
        for (int rep = 0; rep < 20; rep++)
        {
            std::size_t r = 2 + rng.below(3), n = r + 1 + rng.below(4);
            arma::cx_mat U = random_hpd(rng, n);
            arma::cx_mat W = random_cx_mat(rng, r, n);
            arma::cx_mat L = matrix_qt_opt_aux(W, U);
            double direct = std::real(arma::trace(W * arma::solve(U, W.t())));
            worst = std::max(worst, std::abs(matrix_qt_value(W, U, L) - direct) /
                                        std::max(1.0, std::abs(direct)));
        }
        detail::push_check(out, "matrix_transform_tightness", worst, 1e-10);
    }

    // Kronecker-trace reduction vs direct Kronecker evaluation
    {
        double worst = 0.0;
        for (int rep = 0; rep < 20; rep++)
        {
            std::size_t n1 = 1 + rng.below(3), n2 = 1 + rng.below(3);
            std::size_t n3 = 1 + rng.below(3), n4 = 1 + rng.below(3);
            arma::cx_vec a = random_cx_vec(rng, n1), b = random_cx_vec(rng, n2);
            arma::cx_mat C = random_cx_mat(rng, n3, n4);
            arma::cx_mat F = random_cx_mat(rng, n2 * n4, n1 * n3);
            arma::cx_mat T = kron_trace_reduce(n1, n2, C, F);
            cx lhs = arma::as_scalar(b.t() * T * a);
            cx rhs = arma::trace(arma::kron(a * b.t(), C) * F);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        detail::push_check(out, "kronecker_trace_reduction", worst, 1e-10);
    }

    // correlated estimator with identity covariances equals the flat-fading one
    {
        NetworkConfig cfg = small_config(2, 2, 4, 4, true, 11);
        cfg.correlation_magnitude = 0.0;
        NetworkInstance inst = generate(cfg);
        StreamRng brng(31, stream::baseline);
        PilotConfiguration pc = baseline_random(inst, cfg.pilot_len, brng);
        arma::mat w(2, 2, arma::fill::ones);
        double corr = mse_correlated(inst, pc, w).weighted_sum;
        double flat = mse_uncorrelated(inst, pc, w).weighted_sum;
        detail::push_check(out, "identity_covariance_reduction",
                           std::abs(corr - flat) / std::abs(flat), 1e-9);
    }

    // analytic estimation error vs simulated estimation error
    {
        NetworkInstance inst = generate(small_config(2, 2, 8, 4, false, 13));
        StreamRng brng(17, stream::baseline);
        PilotConfiguration pc = baseline_random(inst, 4, brng);
        arma::mat w(2, 2, arma::fill::ones);
        MseReport an = mse_uncorrelated(inst, pc, w);
        StreamRng mc(seed, stream::monte_carlo + 1);
        double worst = 0.0;
        for (std::size_t l = 0; l < 2; l++)
        {
            arma::vec est = mse_monte_carlo(inst, pc, l, 10000, mc);
            for (std::size_t k = 0; k < 2; k++)
                worst = std::max(worst,
                                 std::abs(est(k) - an.per_user(l, k)) / an.per_user(l, k));
        }
        detail::push_check(out, "analytic_mse_vs_simulation", worst, 0.02);
    }

    // correlated analytic estimation error vs simulation
    {
        NetworkInstance inst = generate(small_config(2, 2, 4, 4, true, 19));
        StreamRng brng(23, stream::baseline);
        PilotConfiguration pc = baseline_random(inst, 4, brng);
        arma::mat w(2, 2, arma::fill::ones);
        MseReport an = mse_correlated(inst, pc, w);
        StreamRng mc(seed, stream::monte_carlo + 2);
        double worst = 0.0;
        for (std::size_t l = 0; l < 2; l++)
        {
            arma::vec est = mse_monte_carlo(inst, pc, l, 10000, mc);
            for (std::size_t k = 0; k < 2; k++)
                worst = std::max(worst,
                                 std::abs(est(k) - an.per_user(l, k)) / an.per_user(l, k));
        }
        detail::push_check(out, "correlated_mse_vs_simulation", worst, 0.02);
    }

    // pilot-block covariance: sample second moment vs closed form
    {
        NetworkInstance inst = generate(small_config(2, 2, 8, 4, false, 29));
        StreamRng brng(41, stream::baseline);
        PilotConfiguration pc = baseline_random(inst, 4, brng);
        arma::cx_mat D = pilot_covariance(inst, pc.materialize(), 0);
        StreamRng mc(seed, stream::monte_carlo + 3);
        arma::cx_mat Dhat = pilot_covariance_monte_carlo(inst, pc, 0, 10000, mc);
        detail::push_check(out, "pilot_covariance_vs_simulation",
                           arma::norm(Dhat - D, "fro") / arma::norm(D, "fro"), 0.03);
    }

    // finite-antenna rate formula vs use-and-forget simulation
    {
        NetworkInstance inst = generate(small_config(2, 2, 8, 4, false, 37));
        StreamRng brng(43, stream::baseline);
        PilotConfiguration pc = baseline_random(inst, 4, brng);
        RateReport an = rate_finite(inst, pc);
        StreamRng mc(seed, stream::monte_carlo + 4);
        double est = rate_monte_carlo(inst, pc, 0, 0, 20000, mc);
        detail::push_check(out, "finite_antenna_rate_vs_simulation",
                           std::abs(est - an.per_user(0, 0)) / an.per_user(0, 0), 0.10);
    }

    // matching solver vs full permutation enumeration (5 users, 6 pilots)
    {
        double worst = 0.0;
        for (int rep = 0; rep < 10; rep++)
        {
            arma::mat wts(5, 6);
            for (auto &x : wts)
                x = rng.uniform(-1.0, 2.0);
            AssignmentResult got = hungarian_max(wts);
            std::vector<std::size_t> cols = {0, 1, 2, 3, 4, 5};
            double best = -1e300;
            std::sort(cols.begin(), cols.end());
            do
            {
                double tot = 0.0;
                for (std::size_t r = 0; r < 5; r++)
                    tot += wts(r, cols[r]);
                best = std::max(best, tot);
            } while (std::next_permutation(cols.begin(), cols.end()));
            worst = std::max(worst, std::abs(got.total - best));
        }
        detail::push_check(out, "matching_vs_enumeration", worst, 1e-9);
    }

    // bounded simplex on a problem with a hand-checked optimum:
    // max x1 + 2 x2, x1 + x2 <= 3, x1 <= 2, x2 <= 2, 0 <= x <= 2 -> (1,2), obj 5
    {
        arma::vec c = {1.0, 2.0};
        arma::mat A = {{1.0, 1.0}};
        arma::vec b = {3.0};
        arma::vec lo = {0.0, 0.0}, hi = {2.0, 2.0};
        LpResult r = simplex_solve(c, A, b, lo, hi);
        double err = std::abs(r.objective - 5.0) + std::abs(r.x(1) - 2.0);
        detail::push_check(out, "bounded_simplex_known_optimum",
                           r.status == LpStatus::Optimal ? err : 1e300, 1e-9);
    }

    // generator determinism: identical configuration twice is bitwise equal
    {
        NetworkConfig cfg = small_config(3, 2, 4, 4, true, 101);
        NetworkInstance a = generate(cfg), b = generate(cfg);
        bool same = arma::approx_equal(a.beta, b.beta, "absdiff", 0.0) &&
                    arma::approx_equal(a.user_xy, b.user_xy, "absdiff", 0.0);
        detail::push_check(out, "generator_determinism", same ? 0.0 : 1.0, 0.0);
    }

    return out;
}

inline bool print_validation(const std::vector<CheckResult> &checks)
{
    bool ok = true;
    for (const auto &c : checks)
    {
        std::printf("[%s] %-34s observed %.3e  tolerance %.3e\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.observed, c.tolerance);
        ok = ok && c.pass;
    }
    return ok;
}

} // namespace pilotforge

#endif
