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

#ifndef pilotforge_solvers_H
#define pilotforge_solvers_H

#include "common.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace pilotforge
{

namespace detail
{

// Min-cost perfect matching on a square cost matrix (potentials + shortest
// augmenting paths, O(n^3)). Returns row -> column.
inline std::vector<std::size_t> square_min_assignment(const arma::mat &cost)
{
    const std::size_t n = cost.n_rows;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; i++)
    {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do
        {
            used[j0] = 1;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; j++)
                if (!used[j])
                {
                    double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if (cur < minv[j])
                    {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta)
                    {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (std::size_t j = 0; j <= n; j++)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                    minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; j++)
        if (p[j] != 0)
            row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Best total weight of an injective rows -> columns assignment (maximize),
// with some columns masked off. Pads rows with zero-weight dummies.
inline double injection_max_total(const arma::mat &w, const std::vector<char> &col_allowed)
{
    const std::size_t K = w.n_rows, tau = w.n_cols;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < tau; c++)
        if (col_allowed[c])
            cols.push_back(c);
    const std::size_t n = cols.size();
    if (K > n)
        throw std::invalid_argument("hungarian_max: more rows than available columns");
    arma::mat cost(n, n, arma::fill::zeros);
    for (std::size_t i = 0; i < K; i++)
        for (std::size_t c = 0; c < n; c++)
            cost(i, c) = -w(i, cols[c]); // dummies keep cost 0
    auto a = square_min_assignment(cost);
    double total = 0.0;
    for (std::size_t i = 0; i < K; i++)
        total += w(i, cols[a[i]]);
    return total;
}

} // namespace detail

struct AssignmentResult
{
    std::vector<std::size_t> row_to_col;
    double total = 0.0;
};

// Maximum-weight injective assignment of K rows to tau >= K columns.
// Among optima, returns the lexicographically smallest column sequence
// (row 0 first); optimality ties are resolved within a relative tolerance.
inline AssignmentResult hungarian_max(const arma::mat &weights)
{
    const std::size_t K = weights.n_rows, tau = weights.n_cols;
    if (K == 0 || tau == 0)
        throw std::invalid_argument("hungarian_max: empty weight matrix");
    if (K > tau)
        throw std::invalid_argument("hungarian_max: needs at least as many columns as rows");

    std::vector<char> allowed(tau, 1);
    double best = detail::injection_max_total(weights, allowed);
    const double tol = 1e-9 * arma::abs(weights).max(); // relative: weights scale with pathloss

    AssignmentResult res;
    res.row_to_col.resize(K);
    double pinned = 0.0;
    arma::mat w = weights;
    std::vector<std::size_t> live_rows(K);
    for (std::size_t i = 0; i < K; i++)
        live_rows[i] = i;

    // Fix rows one at a time to the smallest column that preserves optimality
    for (std::size_t i = 0; i < K; i++)
    {
        bool placed = false;
        for (std::size_t c = 0; c < tau && !placed; c++)
        {
            if (!allowed[c])
                continue;
            allowed[c] = 0;
            double rest = 0.0;
            if (i + 1 < K)
            {
                arma::mat sub(K - i - 1, tau);
                for (std::size_t r = i + 1; r < K; r++)
                    sub.row(r - i - 1) = weights.row(r);
                rest = detail::injection_max_total(sub, allowed);
            }
            if (pinned + weights(i, c) + rest >= best - tol)
            {
                res.row_to_col[i] = c;
                pinned += weights(i, c);
                placed = true;
            }
            else
                allowed[c] = 1;
        }
        if (!placed)
            throw numerical_error("hungarian_max: lexicographic refinement lost the optimum");
    }
    res.total = pinned;
    return res;
}

// ---- bounded-variable simplex -------------------------------------------

enum class LpStatus
{
    Optimal,
    Unbounded,
    IterLimit
};

struct LpResult
{
    LpStatus status = LpStatus::Optimal;
    arma::vec x;            // structural variables
    double objective = 0.0; // c^T x
    std::size_t pivots = 0;
};

// Maximize c^T x subject to A x <= b and lo <= x <= hi (hi may be +inf).
// Dense primal simplex with bounded variables and Bland's rule (smallest
// index enters and leaves), pivot limit 1e4. Requires the all-lower-bounds
// point to satisfy A lo <= b, which holds for every program built here.
namespace detail
{

// Geometric-mean equilibration scales (powers of two, so no rounding is
// introduced). Rows and columns of the constraint matrix can mix O(1)
// epigraph coefficients with products of squared pathloss gains; without
// rescaling, the pivoting tolerance tests lose all meaning.
inline void equilibrate(arma::mat &A, arma::vec &row_scale, arma::vec &col_scale)
{
    const std::size_t m = A.n_rows, n = A.n_cols;
    row_scale.ones(m);
    col_scale.ones(n);
    auto snap = [](double g) { return std::exp2(std::round(std::log2(g))); };
    for (int sweep = 0; sweep < 6; sweep++)
    {
        for (std::size_t i = 0; i < m; i++)
        {
            double big = 0.0, small = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; j++)
            {
                double v = std::abs(A(i, j));
                if (v > 0.0)
                {
                    big = std::max(big, v);
                    small = std::min(small, v);
                }
            }
            if (big == 0.0)
                continue;
            double g = snap(std::sqrt(big * small));
            A.row(i) /= g;
            row_scale(i) /= g;
        }
        for (std::size_t j = 0; j < n; j++)
        {
            double big = 0.0, small = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; i++)
            {
                double v = std::abs(A(i, j));
                if (v > 0.0)
                {
                    big = std::max(big, v);
                    small = std::min(small, v);
                }
            }
            if (big == 0.0)
                continue;
            double g = snap(std::sqrt(big * small));
            A.col(j) /= g;
            col_scale(j) /= g;
        }
    }
}

} // namespace detail

inline LpResult simplex_solve(const arma::vec &c_in, const arma::mat &A_in, const arma::vec &b_in,
                              const arma::vec &lo_in, const arma::vec &hi_in,
                              std::size_t max_pivots = 10000)
{
    const std::size_t n = c_in.n_elem, m = A_in.n_rows;
    if (A_in.n_cols != n || b_in.n_elem != m || lo_in.n_elem != n || hi_in.n_elem != n)
        throw std::invalid_argument("simplex_solve: dimension mismatch");
    for (std::size_t j = 0; j < n; j++)
        if (!(lo_in(j) <= hi_in(j)) || !std::isfinite(lo_in(j)))
            throw std::invalid_argument("simplex_solve: bounds must satisfy finite lo <= hi");

    // Solve in equilibrated variables x' = x / col_scale: rows scale freely,
    // bounds and costs follow the column scales, the optimum maps back exactly.
    arma::mat A = A_in;
    arma::vec row_scale, col_scale;
    detail::equilibrate(A, row_scale, col_scale);
    arma::vec b = b_in % row_scale;
    arma::vec c = c_in % col_scale;
    arma::vec lo = lo_in / col_scale;
    arma::vec hi = hi_in / col_scale;

    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t N = n + m; // structurals then slacks
    arma::vec LO(N), HI(N), C(N, arma::fill::zeros);
    LO.head(n) = lo;
    HI.head(n) = hi;
    LO.tail(m).zeros();
    HI.tail(m).fill(inf);
    C.head(n) = c;

    arma::mat T(m, N); // [A | I]
    T.cols(0, n - 1) = A;
    T.cols(n, N - 1) = arma::eye(m, m);

    // start: structurals at lower bound, slacks basic
    std::vector<int> state(N, -1); // -1 at lo, +1 at hi, 0 basic
    std::vector<std::size_t> basis(m);
    for (std::size_t r = 0; r < m; r++)
    {
        basis[r] = n + r;
        state[n + r] = 0;
    }
    arma::vec resid = b - A * lo;
    if (resid.min() < -1e-9 * std::max(1.0, arma::abs(b).max()))
        throw std::invalid_argument("simplex_solve: lower-bound point violates constraints");

    arma::vec xB = resid; // slack values
    arma::mat Binv = arma::eye(m, m);
    const double tol = 1e-9;

    LpResult res;
    for (res.pivots = 0; res.pivots < max_pivots; res.pivots++)
    {
        // reduced costs
        arma::vec cB(m);
        for (std::size_t r = 0; r < m; r++)
            cB(r) = C(basis[r]);
        arma::vec y = Binv.t() * cB;

        std::size_t enter = N;
        int dir = 0;
        for (std::size_t j = 0; j < N; j++)
        {
            if (state[j] == 0)
                continue;
            // significance is judged against the terms entering the
            // subtraction; entries scale with squared pathloss coefficients
            double mag = std::abs(C(j)) + arma::dot(arma::abs(y), arma::abs(T.col(j)));
            double d = C(j) - arma::dot(y, T.col(j));
            if (state[j] == -1 && d > tol * mag)
            {
                enter = j;
                dir = +1;
                break; // Bland: smallest improving index
            }
            if (state[j] == +1 && d < -tol * mag)
            {
                enter = j;
                dir = -1;
                break;
            }
        }
        if (enter == N)
        {
            res.status = LpStatus::Optimal;
            break;
        }

        arma::vec col = Binv * T.col(enter); // change of basics per unit of entering
        const double rate_tol = tol * arma::abs(col).max();
        // entering moves by t*dir; basic r moves at rate -dir*col(r)
        std::vector<double> rooms(m, inf);
        double best_room = inf;
        for (std::size_t r = 0; r < m; r++)
        {
            double rate = -double(dir) * col(r);
            double room;
            if (rate > rate_tol)
                room = (HI(basis[r]) - xB(r)) / rate;
            else if (rate < -rate_tol)
                room = (LO(basis[r]) - xB(r)) / rate;
            else
                continue;
            if (room < 0.0)
                room = 0.0; // roundoff guard
            rooms[r] = room;
            best_room = std::min(best_room, room);
        }
        // Bland: smallest variable index among the minimum-ratio rows leaves
        std::size_t leave_row = m;
        for (std::size_t r = 0; r < m; r++)
            if (rooms[r] <= best_room * (1.0 + 1e-9) &&
                (leave_row == m || basis[r] < basis[leave_row]))
                leave_row = r;
        double flip_room = HI(enter) - LO(enter);
        if (flip_room < best_room)
        {
            if (!std::isfinite(flip_room))
            {
                res.status = LpStatus::Unbounded;
                return res;
            }
            xB -= double(dir) * flip_room * col;
            state[enter] = -state[enter];
            continue;
        }
        if (!std::isfinite(best_room))
        {
            res.status = LpStatus::Unbounded;
            return res;
        }

        xB -= double(dir) * best_room * col;
        std::size_t leave = basis[leave_row];
        double leave_rate = -double(dir) * col(leave_row);
        state[leave] = (leave_rate > 0.0) ? +1 : -1;
        double enter_val = (dir > 0 ? LO(enter) : HI(enter)) + double(dir) * best_room;
        basis[leave_row] = enter;
        state[enter] = 0;
        xB(leave_row) = enter_val;
        // rank-1 basis inverse update
        arma::rowvec pivot_row = Binv.row(leave_row) / col(leave_row);
        for (std::size_t r = 0; r < m; r++)
            if (r != leave_row)
                Binv.row(r) -= col(r) * pivot_row;
        Binv.row(leave_row) = pivot_row;
    }
    if (res.pivots >= max_pivots)
        res.status = LpStatus::IterLimit;

    // recover structural solution, mapped back to the caller's variables;
    // basic values accumulate pivot roundoff, so project them onto their bounds
    arma::vec full(N);
    for (std::size_t j = 0; j < N; j++)
        full(j) = (state[j] == +1) ? HI(j) : LO(j);
    for (std::size_t r = 0; r < m; r++)
        full(basis[r]) = std::clamp(xB(r), LO(basis[r]), HI(basis[r]));
    res.x = full.head(n) % col_scale;
    res.objective = arma::dot(c_in, res.x);
    return res;
}

} // namespace pilotforge

#endif
