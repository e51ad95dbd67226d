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

#ifndef pilotforge_common_H
#define pilotforge_common_H

#include <armadillo>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pilotforge
{

using cx = std::complex<double>;

// Rates are clipped here so that interference-free users keep CDFs finite.
constexpr double rate_cap_bits = 30.0;

// SINR value reported for users whose interference set is empty.
inline double sinr_cap()
{
    return std::exp2(rate_cap_bits) - 1.0;
}

// Flat user index; cells and users are 0-based throughout.
inline std::size_t user_index(std::size_t l, std::size_t k, std::size_t K)
{
    return l * K + k;
}

inline double db_from_linear(double x)
{
    return 10.0 * std::log10(x);
}

inline double linear_from_db(double x)
{
    return std::pow(10.0, x / 10.0);
}

// Thrown when an iterative routine cannot reach its numerical contract
// (failed factorization, multiplier bisection exhaustion, pivot limit, ...).
class numerical_error : public std::runtime_error
{
  public:
    explicit numerical_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace pilotforge

#endif
