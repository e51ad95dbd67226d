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

#ifndef pilotforge_network_H
#define pilotforge_network_H

#include "common.hpp"
#include "rng.hpp"

#include <cstdint>
#include <vector>

namespace pilotforge
{

struct NetworkConfig
{
    std::size_t cells = 7;          // L
    std::size_t users_per_cell = 6; // K
    std::size_t antennas = 100;     // M
    std::size_t pilot_len = 16;     // tau

    double bs_distance_km = 0.5;  // adjacent base station spacing
    double max_power_mw = 199.52623149688787; // 23 dBm
    double noise_power_mw = 2.517850823588343e-10; // -169 dBm/Hz over 20 MHz

    double pathloss_a_db = 128.1; // offset at 1 km
    double pathloss_b_db = 37.6;  // slope per decade
    double shadowing_std_db = 8.0;
    double min_distance_km = 0.035; // pathloss clamp below this range

    bool correlated = false;
    double correlation_magnitude = 0.5; // nu in [0,1)

    std::uint64_t seed = 1;

    void validate() const
    {
        if (cells == 0 || users_per_cell == 0 || antennas == 0 || pilot_len == 0)
            throw std::invalid_argument("network: cells, users_per_cell, antennas and pilot_len must be positive");
        if (bs_distance_km <= 0.0 || max_power_mw <= 0.0 || noise_power_mw <= 0.0)
            throw std::invalid_argument("network: bs_distance_km, max_power_mw and noise_power_mw must be positive");
        if (shadowing_std_db < 0.0 || min_distance_km <= 0.0)
            throw std::invalid_argument("network: shadowing_std_db must be >= 0 and min_distance_km > 0");
        if (correlation_magnitude < 0.0 || correlation_magnitude >= 1.0)
            throw std::invalid_argument("network: correlation_magnitude must lie in [0,1)");
    }
};

// Distance-based pathloss in dB; ranges below min_km are clamped to min_km.
inline double pathloss_db(double d_km, double a_db = 128.1, double b_db = 37.6, double min_km = 0.035)
{
    if (d_km < min_km)
        d_km = min_km;
    return a_db + b_db * std::log10(d_km);
}

// Noise power in mW from a power spectral density (dBm/Hz) and bandwidth (Hz).
inline double noise_power_linear(double psd_dbm_hz, double bandwidth_hz)
{
    if (bandwidth_hz <= 0.0)
        throw std::invalid_argument("noise_power_linear: bandwidth must be positive");
    return linear_from_db(psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

// Exponential antenna correlation: entry (m,n) = omega^(m-n) for m >= n with
// omega = nu * exp(j*theta); Hermitian, unit diagonal, PSD for nu in [0,1).
inline arma::cx_mat exp_correlation(std::size_t M, double nu, double theta)
{
    if (nu < 0.0 || nu >= 1.0)
        throw std::invalid_argument("exp_correlation: nu must lie in [0,1)");
    arma::cx_mat R(M, M, arma::fill::eye);
    if (nu == 0.0)
        return R;
    cx omega = std::polar(nu, theta);
    std::vector<cx> pw(M);
    pw[0] = 1.0;
    for (std::size_t d = 1; d < M; d++)
        pw[d] = pw[d - 1] * omega;
    for (std::size_t m = 0; m < M; m++)
        for (std::size_t n = 0; n < m; n++)
        {
            R(m, n) = pw[m - n];
            R(n, m) = std::conj(pw[m - n]);
        }
    return R;
}

struct NetworkInstance
{
    NetworkConfig config;

    arma::mat bs_xy;   // L x 2
    arma::mat user_xy; // (L*K) x 2, row user_index(l,k)

    // beta(i, l, k): large-scale gain from user (l,k) to base station i
    arma::cube beta;

    // R(i, l, k): M x M receive correlation of the (i <- (l,k)) link;
    // empty unless config.correlated
    arma::field<arma::cx_mat> cov;

    // translations applied when measuring wrap-around distances ({0} when
    // the layout does not wrap)
    std::vector<arma::vec2> wrap_offsets;

    // true when the layout provides an exact wrap-around torus (L in {1,7})
    bool wrap_exact = true;

    std::size_t cells() const { return config.cells; }
    std::size_t users() const { return config.users_per_cell; }

    // Minimum distance between two points over all wrap translations of b
    double wrap_distance(const arma::vec2 &a, const arma::vec2 &b) const
    {
        double best = arma::datum::inf;
        for (const auto &t : wrap_offsets)
        {
            double dx = a[0] - b[0] - t[0];
            double dy = a[1] - b[1] - t[1];
            double d = std::sqrt(dx * dx + dy * dy);
            if (d < best)
                best = d;
        }
        return best;
    }
};

namespace detail
{

// Axial basis of the hexagonal base-station lattice with spacing d
inline arma::vec2 hex_u(double d) { return {d, 0.0}; }
inline arma::vec2 hex_v(double d) { return {0.5 * d, 0.8660254037844386467637232 * d}; }

// Base-station centers: origin first, then spiral rings outward
inline arma::mat hex_centers(std::size_t L, double d)
{
    arma::vec2 u = hex_u(d), v = hex_v(d);
    std::vector<arma::vec2> pts;
    pts.push_back({0.0, 0.0});
    // ring r: start at r*u, walk the six edge directions
    const arma::vec2 dirs[6] = {arma::vec2{v[0] - u[0], v[1] - u[1]},
                                arma::vec2{-u[0], -u[1]},
                                arma::vec2{-v[0], -v[1]},
                                arma::vec2{u[0] - v[0], u[1] - v[1]},
                                arma::vec2{u[0], u[1]},
                                arma::vec2{v[0], v[1]}};
    for (std::size_t r = 1; pts.size() < L; r++)
    {
        arma::vec2 p = {u[0] * double(r), u[1] * double(r)};
        for (int side = 0; side < 6; side++)
            for (std::size_t step = 0; step < r; step++)
            {
                pts.push_back(p);
                p[0] += dirs[side][0];
                p[1] += dirs[side][1];
            }
    }
    arma::mat out(L, 2);
    for (std::size_t i = 0; i < L; i++)
    {
        out(i, 0) = pts[i][0];
        out(i, 1) = pts[i][1];
    }
    return out;
}

// Uniform sample from the hexagonal cell (Voronoi region of the lattice),
// centered at the origin, via rejection from the bounding box
inline arma::vec2 hex_sample(double d, StreamRng &rng)
{
    arma::vec2 u = hex_u(d), v = hex_v(d);
    const arma::vec2 nb[6] = {u,
                              v,
                              {v[0] - u[0], v[1] - u[1]},
                              {-u[0], -u[1]},
                              {-v[0], -v[1]},
                              {u[0] - v[0], u[1] - v[1]}};
    double R = d / 1.7320508075688772935274463;
    double half = 0.5 * d * d;
    for (;;)
    {
        double x = rng.uniform(-R, R);
        double y = rng.uniform(-R, R);
        bool inside = true;
        for (const auto &n : nb)
            if (x * n[0] + y * n[1] > half)
            {
                inside = false;
                break;
            }
        if (inside)
            return {x, y};
    }
}

} // namespace detail

// Deterministic network drop: hexagonal layout, uniform users per cell,
// lognormal shadowing, optional per-link exponential antenna correlation.
// Wrap-around (torus) distances are exact for L in {1,7}; other L fall back
// to a planar spiral layout and set wrap_exact = false.
inline NetworkInstance generate(const NetworkConfig &config)
{
    config.validate();
    const std::size_t L = config.cells, K = config.users_per_cell, M = config.antennas;
    const double d = config.bs_distance_km;

    NetworkInstance inst;
    inst.config = config;
    inst.bs_xy = detail::hex_centers(L, d);

    inst.wrap_offsets.clear();
    inst.wrap_offsets.push_back({0.0, 0.0});
    if (L == 7)
    {
        // the 7-cell cluster tiles the plane; its lattice is spanned by
        // s1 = 2u+v and its 60-degree rotations (|s| = sqrt(7)*d)
        arma::vec2 u = detail::hex_u(d), v = detail::hex_v(d);
        arma::vec2 s1 = {2 * u[0] + v[0], 2 * u[1] + v[1]};
        arma::vec2 s2 = {-u[0] + 3 * v[0], -u[1] + 3 * v[1]};
        arma::vec2 s3 = {s2[0] - s1[0], s2[1] - s1[1]};
        for (const auto &s : {s1, s2, s3})
        {
            inst.wrap_offsets.push_back(s);
            inst.wrap_offsets.push_back({-s[0], -s[1]});
        }
        inst.wrap_exact = true;
    }
    else
    {
        inst.wrap_exact = (L == 1);
    }

    StreamRng topo(config.seed, stream::topology);
    inst.user_xy.set_size(L * K, 2);
    for (std::size_t l = 0; l < L; l++)
        for (std::size_t k = 0; k < K; k++)
        {
            arma::vec2 p = detail::hex_sample(d, topo);
            std::size_t uix = user_index(l, k, K);
            inst.user_xy(uix, 0) = inst.bs_xy(l, 0) + p[0];
            inst.user_xy(uix, 1) = inst.bs_xy(l, 1) + p[1];
        }

    StreamRng shadow(config.seed, stream::shadowing);
    inst.beta.set_size(L, L, K);
    for (std::size_t i = 0; i < L; i++)
        for (std::size_t l = 0; l < L; l++)
            for (std::size_t k = 0; k < K; k++)
            {
                arma::vec2 bs = {inst.bs_xy(i, 0), inst.bs_xy(i, 1)};
                std::size_t uix = user_index(l, k, K);
                arma::vec2 ue = {inst.user_xy(uix, 0), inst.user_xy(uix, 1)};
                double dist = inst.wrap_distance(ue, bs);
                double pl = pathloss_db(dist, config.pathloss_a_db, config.pathloss_b_db,
                                        config.min_distance_km);
                double sh = config.shadowing_std_db * shadow.normal();
                inst.beta(i, l, k) = linear_from_db(-pl + sh);
            }

    if (config.correlated)
    {
        StreamRng corr(config.seed, stream::correlation);
        inst.cov.set_size(L, L, K);
        for (std::size_t i = 0; i < L; i++)
            for (std::size_t l = 0; l < L; l++)
                for (std::size_t k = 0; k < K; k++)
                {
                    double theta = corr.uniform(0.0, 6.283185307179586476925286766559);
                    inst.cov(i, l, k) = exp_correlation(M, config.correlation_magnitude, theta);
                }
    }
    return inst;
}

} // namespace pilotforge

#endif
