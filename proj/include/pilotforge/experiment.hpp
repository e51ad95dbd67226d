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

#ifndef pilotforge_experiment_H
#define pilotforge_experiment_H

#include "baselines.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "estimation.hpp"
#include "maxmin.hpp"
#include "network.hpp"
#include "nonorth.hpp"
#include "orth.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <thread>
#include <vector>

namespace pilotforge
{

// One summary line per (trial, pilot length, algorithm). Every quantity is
// recomputed through the estimation module from the returned configuration;
// algorithms never report their own objective here.
struct ResultRow
{
    std::size_t trial = 0;
    std::size_t tau = 0;
    std::string algorithm;
    double weighted_sum_mse = 0.0;
    double weighted_sum_mse_db = 0.0;
    double mse_db_rel_lower_bound = 0.0;
    double min_rate = 0.0;
    double sum_rate = 0.0;
    std::size_t iterations = 0;
    double wall_ms = 0.0;
};

struct TraceRow
{
    std::size_t trial = 0, tau = 0, iter = 0;
    double objective = 0.0;
    std::string option;
    double elapsed_ms = 0.0;
};

struct AssignmentRow
{
    std::size_t trial = 0, tau = 0, cell = 0, user = 0, pilot = 0;
    double power_mw = 0.0;
    double asymptotic_rate = 0.0; // filled for the max-min design only
};

struct ExperimentResult
{
    std::vector<ResultRow> rows;
    std::vector<std::string> files;
};

namespace detail
{

struct TrialOutput
{
    std::vector<ResultRow> rows;
    std::map<std::string, std::vector<TraceRow>> traces;
    std::vector<AssignmentRow> assign_orth;
    std::vector<AssignmentRow> assign_maxmin;
};

inline double metric_value(const ResultRow &r, const std::string &metric)
{
    if (metric == "weighted_sum_mse")
        return r.weighted_sum_mse;
    if (metric == "weighted_sum_mse_db")
        return r.weighted_sum_mse_db;
    if (metric == "mse_db_rel_lower_bound")
        return r.mse_db_rel_lower_bound;
    if (metric == "min_rate")
        return r.min_rate;
    if (metric == "sum_rate")
        return r.sum_rate;
    throw std::invalid_argument("metric_value: unknown metric '" + metric + "'");
}

inline double trial_mse(const NetworkInstance &inst, const PilotConfiguration &pilots,
                        const arma::mat &weights)
{
    return inst.config.correlated ? mse_correlated(inst, pilots, weights).weighted_sum
                                  : mse_uncorrelated(inst, pilots, weights).weighted_sum;
}

inline void fill_rates(const NetworkInstance &inst, const PilotConfiguration &pilots,
                       ResultRow &row)
{
    RateReport r = pilots.orthogonal() ? rate_asymptotic(inst, pilots) : rate_finite(inst, pilots);
    row.min_rate = r.min_rate;
    row.sum_rate = r.sum_rate;
}

inline void append_trace(TrialOutput &out, const std::string &algo, std::size_t trial,
                         std::size_t tau, const IterationTrace &trace)
{
    auto &rows = out.traces[algo];
    for (std::size_t i = 0; i < trace.objective.size(); i++)
        rows.push_back({trial, tau, i, trace.objective[i], trace.option,
                        i < trace.elapsed_ms.size() ? trace.elapsed_ms[i] : 0.0});
}

inline void append_assignments(std::vector<AssignmentRow> &rows, std::size_t trial,
                               std::size_t tau, const PilotConfiguration &pilots,
                               const RateReport *rates)
{
    for (std::size_t l = 0; l < pilots.L; l++)
        for (std::size_t k = 0; k < pilots.K; k++)
            rows.push_back({trial, tau, l, k, std::size_t(pilots.assignment(l, k)),
                            pilots.power(l, k), rates ? rates->per_user(l, k) : 0.0});
}

inline TrialOutput run_trial(const ExperimentSpec &spec, std::size_t trial)
{
    TrialOutput out;
    const std::uint64_t trial_seed = derive_seed(spec.master_seed, trial);
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    for (std::size_t tau : spec.taus())
    {
        NetworkConfig cfg = spec.network;
        cfg.pilot_len = tau;
        cfg.seed = trial_seed;
        NetworkInstance inst = generate(cfg);
        arma::mat weights = make_weights(inst, spec.weights);
        LowerBound lb = lower_bound_mse(inst, tau, weights);
        const double lb_db = db_from_linear(lb.weighted_sum);

        // every design below starts from the same per-trial orthogonal draw
        StreamRng init_rng(trial_seed, stream::baseline + (std::uint64_t(tau) << 8));
        PilotConfiguration init = baseline_orthogonal(inst, tau, init_rng);

        for (const std::string &algo : spec.algorithms)
        {
            ResultRow row;
            row.trial = trial;
            row.tau = tau;
            row.algorithm = algo;
            PilotConfiguration result = init;
            auto t0 = clock::now();

            if (algo == "lower_bound")
            {
                row.wall_ms = ms_since(t0);
                row.weighted_sum_mse = lb.weighted_sum;
                row.weighted_sum_mse_db = lb_db;
                row.mse_db_rel_lower_bound = 0.0;
                row.min_rate = rate_cap_bits; // contamination-free estimation
                row.sum_rate = rate_cap_bits * double(inst.cells() * inst.users());
                out.rows.push_back(row);
                continue;
            }
            else if (algo == "baseline_orthogonal")
            {
                row.wall_ms = ms_since(t0);
            }
            else if (algo == "baseline_random")
            {
                StreamRng rng(trial_seed, stream::baseline + (std::uint64_t(tau) << 8) + 1);
                result = baseline_random(inst, tau, rng);
                row.wall_ms = ms_since(t0);
            }
            else if (algo == "smart_assignment")
            {
                arma::umat a = smart_assignment(inst, init.assignment, init.power,
                                                spec.algo3.smart_passes, tau);
                result = PilotConfiguration::make_orthogonal(inst.cells(), inst.users(),
                                                             init.basis, a, init.power);
                row.wall_ms = ms_since(t0);
            }
            else if (algo == "nonorth_fp")
            {
                NonorthResult r = inst.config.correlated
                                      ? run_algorithm1_correlated(inst, weights, init, spec.algo1)
                                      : run_algorithm1(inst, weights, init, spec.algo1);
                row.wall_ms = ms_since(t0);
                row.iterations = r.trace.iterations;
                result = r.pilots;
                if (spec.write_traces)
                    append_trace(out, algo, trial, tau, r.trace);
            }
            else if (algo == "orth_fp")
            {
                OrthResult r = inst.config.correlated
                                   ? run_algorithm2_correlated(inst, weights, init, spec.algo2)
                                   : run_algorithm2(inst, weights, init, spec.algo2);
                row.wall_ms = ms_since(t0);
                row.iterations = r.trace.iterations;
                result = r.pilots;
                if (spec.write_traces)
                    append_trace(out, algo, trial, tau, r.trace);
                if (spec.write_assignments)
                    append_assignments(out.assign_orth, trial, tau, result, nullptr);
            }
            else if (algo == "maxmin_fp")
            {
                MaxminResult r = run_algorithm3(inst, init, spec.algo3);
                row.wall_ms = ms_since(t0);
                row.iterations = r.iterations;
                result = r.pilots;
                if (spec.write_traces)
                {
                    auto &rows = out.traces[algo];
                    for (std::size_t i = 0; i < r.lambda_trace.size(); i++)
                        rows.push_back({trial, tau, i, r.lambda_trace[i], "dinkelbach",
                                        i < r.elapsed_ms.size() ? r.elapsed_ms[i] : 0.0});
                }
                if (spec.write_assignments)
                {
                    RateReport rates = rate_asymptotic(inst, result);
                    append_assignments(out.assign_maxmin, trial, tau, result, &rates);
                }
            }
            else
            {
                throw std::invalid_argument("run_trial: unknown algorithm '" + algo + "'");
            }

            row.weighted_sum_mse = trial_mse(inst, result, weights);
            row.weighted_sum_mse_db = db_from_linear(row.weighted_sum_mse);
            row.mse_db_rel_lower_bound = row.weighted_sum_mse_db - lb_db;
            fill_rates(inst, result, row);
            out.rows.push_back(row);
        }
    }
    return out;
}

} // namespace detail

// Runs all trials through a worker pool and writes summary/trace/CDF/
// assignment CSV files under spec.output_dir. Every column except the wall
// time measurements is a pure function of the spec (worker count included).
inline ExperimentResult run_experiment(const ExperimentSpec &spec)
{
    spec.validate();
    std::filesystem::create_directories(spec.output_dir);

    std::vector<detail::TrialOutput> outputs(spec.trials);
    std::vector<std::exception_ptr> failures(spec.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;)
        {
            std::size_t t = next.fetch_add(1);
            if (t >= spec.trials)
                return;
            try
            {
                outputs[t] = detail::run_trial(spec, t);
            }
            catch (...)
            {
                failures[t] = std::current_exception();
            }
        }
    };
    std::size_t nthreads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
    nthreads = std::max<std::size_t>(1, std::min(nthreads, spec.trials));
    if (nthreads == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nthreads; i++)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    for (std::size_t t = 0; t < spec.trials; t++)
        if (failures[t])
            std::rethrow_exception(failures[t]);

    ExperimentResult result;
    const std::string dir = spec.output_dir;
    auto path = [&dir](const std::string &name) { return dir + "/" + name; };

    {
        CsvWriter summary(path("summary.csv"),
                          {"trial", "tau", "algorithm", "weighted_sum_mse", "weighted_sum_mse_db",
                           "mse_db_rel_lower_bound", "min_rate", "sum_rate", "iterations",
                           "wall_ms"});
        for (const auto &out : outputs)
            for (const auto &r : out.rows)
            {
                summary.row({(long long)r.trial, (long long)r.tau, r.algorithm,
                             r.weighted_sum_mse, r.weighted_sum_mse_db, r.mse_db_rel_lower_bound,
                             r.min_rate, r.sum_rate, (long long)r.iterations, r.wall_ms});
                result.rows.push_back(r);
            }
        summary.close();
        result.files.push_back(path("summary.csv"));
    }

    if (spec.write_traces)
        for (const std::string &algo : spec.algorithms)
        {
            if (algo != "nonorth_fp" && algo != "orth_fp" && algo != "maxmin_fp")
                continue;
            std::string file = path("trace_" + algo + ".csv");
            CsvWriter w(file, {"trial", "tau", "iter", "objective", "option", "elapsed_ms"});
            for (const auto &out : outputs)
            {
                auto it = out.traces.find(algo);
                if (it == out.traces.end())
                    continue;
                for (const auto &r : it->second)
                    w.row({(long long)r.trial, (long long)r.tau, (long long)r.iter, r.objective,
                           r.option, r.elapsed_ms});
            }
            w.close();
            result.files.push_back(file);
        }

    if (spec.write_assignments)
    {
        if (spec.wants("orth_fp"))
        {
            std::string file = path("assignment_orth_fp.csv");
            CsvWriter w(file, {"trial", "tau", "cell", "user", "pilot_index", "power_mw"});
            for (const auto &out : outputs)
                for (const auto &r : out.assign_orth)
                    w.row({(long long)r.trial, (long long)r.tau, (long long)r.cell,
                           (long long)r.user, (long long)r.pilot, r.power_mw});
            w.close();
            result.files.push_back(file);
        }
        if (spec.wants("maxmin_fp"))
        {
            std::string file = path("assignment_maxmin_fp.csv");
            CsvWriter w(file, {"trial", "tau", "cell", "user", "pilot_index", "power_mw",
                               "asymptotic_rate"});
            for (const auto &out : outputs)
                for (const auto &r : out.assign_maxmin)
                    w.row({(long long)r.trial, (long long)r.tau, (long long)r.cell,
                           (long long)r.user, (long long)r.pilot, r.power_mw, r.asymptotic_rate});
            w.close();
            result.files.push_back(file);
        }
    }

    if (spec.write_cdf)
        for (const std::string &metric : spec.cdf_metrics)
        {
            std::string file = path("cdf_" + metric + ".csv");
            CsvWriter w(file, {"algorithm", "tau", "value", "percentile"});
            for (const std::string &algo : spec.algorithms)
                for (std::size_t tau : spec.taus())
                {
                    std::vector<double> vals;
                    for (const auto &r : result.rows)
                        if (r.algorithm == algo && r.tau == tau)
                            vals.push_back(detail::metric_value(r, metric));
                    std::sort(vals.begin(), vals.end());
                    for (std::size_t i = 0; i < vals.size(); i++)
                        w.row({algo, (long long)tau, vals[i],
                               double(i + 1) / double(vals.size())});
                }
            w.close();
            result.files.push_back(file);
        }

    return result;
}

} // namespace pilotforge

#endif
