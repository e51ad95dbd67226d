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

#ifndef pilotforge_config_H
#define pilotforge_config_H

#include "common.hpp"
#include "maxmin.hpp"
#include "network.hpp"
#include "nonorth.hpp"
#include "orth.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace pilotforge
{

inline const std::vector<std::string> &known_algorithms()
{
    static const std::vector<std::string> names = {
        "nonorth_fp", "orth_fp", "maxmin_fp", "baseline_orthogonal",
        "baseline_random", "lower_bound", "smart_assignment"};
    return names;
}

struct ExperimentSpec
{
    NetworkConfig network;
    std::vector<std::string> algorithms = known_algorithms();
    std::string weights = "unit"; // "unit" or "normalized"
    std::size_t trials = 200;
    std::vector<std::size_t> tau_sweep; // empty -> {network.pilot_len}
    std::string output_dir = "out";
    std::uint64_t master_seed = 1;
    std::size_t threads = 0; // 0 -> hardware concurrency

    Algo1Options algo1;
    Algo2Options algo2;
    Algo3Options algo3;

    bool write_traces = true;
    bool write_cdf = true;
    bool write_assignments = true;
    std::vector<std::string> cdf_metrics = {"weighted_sum_mse_db", "min_rate"};

    std::vector<std::size_t> taus() const
    {
        return tau_sweep.empty() ? std::vector<std::size_t>{network.pilot_len} : tau_sweep;
    }

    bool wants(const std::string &algo) const
    {
        return std::find(algorithms.begin(), algorithms.end(), algo) != algorithms.end();
    }

    void validate() const
    {
        network.validate();
        if (trials < 1)
            throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
        if (algorithms.empty())
            throw std::invalid_argument("ExperimentSpec: algorithm list is empty");
        const auto &known = known_algorithms();
        for (const auto &a : algorithms)
            if (std::find(known.begin(), known.end(), a) == known.end())
                throw std::invalid_argument("ExperimentSpec: unknown algorithm '" + a + "'");
        if (weights != "unit" && weights != "normalized")
            throw std::invalid_argument("ExperimentSpec: weights must be 'unit' or 'normalized'");
        bool needs_distinct = wants("orth_fp") || wants("maxmin_fp") ||
                              wants("baseline_orthogonal") || wants("smart_assignment");
        for (std::size_t tau : taus())
        {
            if (tau < 1)
                throw std::invalid_argument("ExperimentSpec: pilot length must be >= 1");
            if (needs_distinct && tau < network.users_per_cell)
                throw std::invalid_argument(
                    "ExperimentSpec: pilot length below users_per_cell while an "
                    "orthogonal-assignment algorithm is selected");
        }
        const std::set<std::string> metrics = {"weighted_sum_mse", "weighted_sum_mse_db",
                                               "mse_db_rel_lower_bound", "min_rate", "sum_rate"};
        for (const auto &m : cdf_metrics)
            if (!metrics.count(m))
                throw std::invalid_argument("ExperimentSpec: unknown cdf metric '" + m + "'");
    }
};

namespace detail
{

using json = nlohmann::json;

inline void reject_unknown_keys(const json &obj, const std::string &path,
                                const std::set<std::string> &allowed)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + path + it.key() + "'");
}

inline double get_number(const json &obj, const std::string &path, const std::string &key,
                         double fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_number())
        throw std::invalid_argument("config: '" + path + key + "' must be a number");
    return v.get<double>();
}

inline std::size_t get_count(const json &obj, const std::string &path, const std::string &key,
                             std::size_t fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
        throw std::invalid_argument("config: '" + path + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline bool get_bool(const json &obj, const std::string &path, const std::string &key,
                     bool fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_boolean())
        throw std::invalid_argument("config: '" + path + key + "' must be true or false");
    return v.get<bool>();
}

inline std::string get_string(const json &obj, const std::string &path, const std::string &key,
                              const std::string &fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_string())
        throw std::invalid_argument("config: '" + path + key + "' must be a string");
    return v.get<std::string>();
}

inline const json &get_object(const json &obj, const std::string &key)
{
    static const json empty = json::object();
    if (!obj.contains(key))
        return empty;
    const json &v = obj.at(key);
    if (!v.is_object())
        throw std::invalid_argument("config: '" + key + "' must be an object");
    return v;
}

} // namespace detail

// Builds an ExperimentSpec from parsed JSON. Power quantities enter in dBm
// (max_power_dbm, noise_psd_dbm_hz + bandwidth_hz) and are converted to
// linear mW here; every unknown key is a configuration error.
inline ExperimentSpec spec_from_json(const nlohmann::json &root)
{
    using detail::get_bool;
    using detail::get_count;
    using detail::get_number;
    using detail::get_object;
    using detail::get_string;
    using detail::reject_unknown_keys;
    using nlohmann::json;

    if (!root.is_object())
        throw std::invalid_argument("config: top level must be an object");
    reject_unknown_keys(root, "", {"network", "experiment", "algo1", "algo2", "algo3", "output"});

    ExperimentSpec spec;

    const json &net = get_object(root, "network");
    reject_unknown_keys(net, "network.",
                        {"cells", "users_per_cell", "antennas", "pilot_length", "bs_distance_km",
                         "max_power_dbm", "noise_psd_dbm_hz", "bandwidth_hz", "pathloss_a_db",
                         "pathloss_b_db", "shadowing_std_db", "min_distance_km", "correlated",
                         "correlation_magnitude"});
    NetworkConfig &n = spec.network;
    n.cells = get_count(net, "network.", "cells", n.cells);
    n.users_per_cell = get_count(net, "network.", "users_per_cell", n.users_per_cell);
    n.antennas = get_count(net, "network.", "antennas", n.antennas);
    n.pilot_len = get_count(net, "network.", "pilot_length", n.pilot_len);
    n.bs_distance_km = get_number(net, "network.", "bs_distance_km", n.bs_distance_km);
    double pmax_dbm = get_number(net, "network.", "max_power_dbm", 23.0);
    double psd_dbm = get_number(net, "network.", "noise_psd_dbm_hz", -169.0);
    double bw_hz = get_number(net, "network.", "bandwidth_hz", 20e6);
    n.max_power_mw = linear_from_db(pmax_dbm);
    n.noise_power_mw = noise_power_linear(psd_dbm, bw_hz);
    n.pathloss_a_db = get_number(net, "network.", "pathloss_a_db", n.pathloss_a_db);
    n.pathloss_b_db = get_number(net, "network.", "pathloss_b_db", n.pathloss_b_db);
    n.shadowing_std_db = get_number(net, "network.", "shadowing_std_db", n.shadowing_std_db);
    n.min_distance_km = get_number(net, "network.", "min_distance_km", n.min_distance_km);
    n.correlated = get_bool(net, "network.", "correlated", n.correlated);
    n.correlation_magnitude =
        get_number(net, "network.", "correlation_magnitude", n.correlation_magnitude);

    const json &exp = get_object(root, "experiment");
    reject_unknown_keys(
        exp, "experiment.",
        {"trials", "seed", "algorithms", "tau_sweep", "weights", "threads", "output_dir"});
    spec.trials = get_count(exp, "experiment.", "trials", spec.trials);
    spec.master_seed = get_count(exp, "experiment.", "seed", std::size_t(spec.master_seed));
    spec.threads = get_count(exp, "experiment.", "threads", spec.threads);
    spec.weights = get_string(exp, "experiment.", "weights", spec.weights);
    spec.output_dir = get_string(exp, "experiment.", "output_dir", spec.output_dir);
    if (exp.contains("algorithms"))
    {
        const json &arr = exp.at("algorithms");
        if (!arr.is_array())
            throw std::invalid_argument("config: 'experiment.algorithms' must be an array");
        spec.algorithms.clear();
        for (const auto &v : arr)
        {
            if (!v.is_string())
                throw std::invalid_argument("config: algorithm names must be strings");
            spec.algorithms.push_back(v.get<std::string>());
        }
    }
    if (exp.contains("tau_sweep"))
    {
        const json &arr = exp.at("tau_sweep");
        if (!arr.is_array())
            throw std::invalid_argument("config: 'experiment.tau_sweep' must be an array");
        spec.tau_sweep.clear();
        for (const auto &v : arr)
        {
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw std::invalid_argument("config: tau_sweep entries must be positive integers");
            spec.tau_sweep.push_back(v.get<std::size_t>());
        }
    }

    const json &a1 = get_object(root, "algo1");
    reject_unknown_keys(a1, "algo1.", {"update", "rel_tol", "max_iters"});
    std::string update = get_string(a1, "algo1.", "update", "lagrange");
    if (update == "lagrange")
        spec.algo1.update = PilotUpdate::lagrange;
    else if (update == "scaled")
        spec.algo1.update = PilotUpdate::scaled;
    else
        throw std::invalid_argument("config: 'algo1.update' must be 'lagrange' or 'scaled'");
    spec.algo1.rel_tol = get_number(a1, "algo1.", "rel_tol", spec.algo1.rel_tol);
    spec.algo1.max_iters = get_count(a1, "algo1.", "max_iters", spec.algo1.max_iters);

    const json &a2 = get_object(root, "algo2");
    reject_unknown_keys(a2, "algo2.", {"matching", "rel_tol", "max_iters"});
    std::string matching = get_string(a2, "algo2.", "matching", "hungarian");
    if (matching == "hungarian")
        spec.algo2.matching = MatchingRule::hungarian;
    else if (matching == "linear")
        spec.algo2.matching = MatchingRule::linear;
    else
        throw std::invalid_argument("config: 'algo2.matching' must be 'hungarian' or 'linear'");
    spec.algo2.rel_tol = get_number(a2, "algo2.", "rel_tol", spec.algo2.rel_tol);
    spec.algo2.max_iters = get_count(a2, "algo2.", "max_iters", spec.algo2.max_iters);

    const json &a3 = get_object(root, "algo3");
    reject_unknown_keys(a3, "algo3.", {"rel_tol", "max_inner", "outer_iters", "smart_passes"});
    spec.algo3.rel_tol = get_number(a3, "algo3.", "rel_tol", spec.algo3.rel_tol);
    spec.algo3.max_inner = get_count(a3, "algo3.", "max_inner", spec.algo3.max_inner);
    spec.algo3.outer_iters = get_count(a3, "algo3.", "outer_iters", spec.algo3.outer_iters);
    spec.algo3.smart_passes = get_count(a3, "algo3.", "smart_passes", spec.algo3.smart_passes);

    const json &out = get_object(root, "output");
    reject_unknown_keys(out, "output.",
                        {"dir", "write_traces", "write_cdf", "write_assignments", "cdf_metrics"});
    spec.output_dir = get_string(out, "output.", "dir", spec.output_dir);
    spec.write_traces = get_bool(out, "output.", "write_traces", spec.write_traces);
    spec.write_cdf = get_bool(out, "output.", "write_cdf", spec.write_cdf);
    spec.write_assignments = get_bool(out, "output.", "write_assignments", spec.write_assignments);
    if (out.contains("cdf_metrics"))
    {
        const json &arr = out.at("cdf_metrics");
        if (!arr.is_array())
            throw std::invalid_argument("config: 'output.cdf_metrics' must be an array");
        spec.cdf_metrics.clear();
        for (const auto &v : arr)
        {
            if (!v.is_string())
                throw std::invalid_argument("config: cdf metric names must be strings");
            spec.cdf_metrics.push_back(v.get<std::string>());
        }
    }

    spec.validate();
    return spec;
}

inline ExperimentSpec load_spec(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    nlohmann::json root;
    try
    {
        root = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw std::invalid_argument("config: parse error in '" + path + "': " + e.what());
    }
    return spec_from_json(root);
}

} // namespace pilotforge

#endif
