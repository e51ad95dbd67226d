// SPDX-License-Identifier: Apache-2.0
//
// End-to-end tests: baselines, experiment harness, CSV outputs, CLI exit
// codes, and the self-check battery.

#include "oracles.hpp"

#include <pilotforge/baselines.hpp>
#include <pilotforge/csv.hpp>
#include <pilotforge/experiment.hpp>
#include <pilotforge/validate.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>

using namespace pilotforge;
using Catch::Approx;

namespace
{

namespace fs = std::filesystem;

ExperimentSpec tiny_spec(const std::string &out_dir)
{
    ExperimentSpec spec;
    spec.network = small_config(2, 2, 8, 2, false, 0);
    spec.trials = 3;
    spec.tau_sweep = {2, 3};
    spec.master_seed = 11;
    spec.output_dir = out_dir;
    spec.threads = 1;
    return spec;
}

// summary rows keyed by (trial, tau, algorithm)
using RowKey = std::tuple<long long, long long, std::string>;

std::map<RowKey, std::vector<double>> index_summary(const CsvTable &t)
{
    std::map<RowKey, std::vector<double>> out;
    for (std::size_t r = 0; r < t.rows.size(); r++)
    {
        RowKey key{(long long)t.number(r, "trial"), (long long)t.number(r, "tau"), t.rows[r][2]};
        std::vector<double> vals;
        for (const std::string &col : {"weighted_sum_mse", "weighted_sum_mse_db",
                                       "mse_db_rel_lower_bound", "min_rate", "sum_rate"})
            vals.push_back(t.number(r, col));
        out.emplace(key, std::move(vals));
    }
    return out;
}

int run_cli(const std::string &args)
{
    std::string cmd = std::string(PILOTFORGE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1)
        return -1;
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("orthogonal baseline: determinism, floor, and reuse penalty")
{
    NetworkInstance solo = generate(small_config(1, 3, 8, 4, false, 201));
    arma::mat w = make_weights(solo, "unit");
    StreamRng r1(7, stream::baseline), r2(7, stream::baseline);
    PilotConfiguration a = baseline_orthogonal(solo, 4, r1);
    PilotConfiguration b = baseline_orthogonal(solo, 4, r2);
    REQUIRE(arma::all(arma::vectorise(a.assignment == b.assignment)));

    // a single cell has no contamination: the baseline sits on the floor
    double mse = mse_uncorrelated(solo, a, w).weighted_sum;
    REQUIRE(mse == Approx(lower_bound_mse(solo, 4, w).weighted_sum).epsilon(1e-12));

    // seven cells fighting over two pilots sit strictly above it
    NetworkInstance crowd = generate(small_config(7, 2, 8, 2, false, 202));
    arma::mat wc = make_weights(crowd, "unit");
    StreamRng r3(8, stream::baseline);
    PilotConfiguration c = baseline_orthogonal(crowd, 2, r3);
    double floor = lower_bound_mse(crowd, 2, wc).weighted_sum;
    REQUIRE(mse_uncorrelated(crowd, c, wc).weighted_sum > 1.02 * floor);
}

TEST_CASE("random baseline: energy budget and average cross-correlation")
{
    NetworkInstance net = generate(small_config(7, 6, 2, 8, false, 203));
    StreamRng rng(9, stream::baseline);
    PilotConfiguration pc = baseline_random(net, 8, rng);
    arma::cx_mat seqs = pc.materialize();
    const double budget = 8.0 * net.config.max_power_mw;
    for (arma::uword u = 0; u < seqs.n_cols; u++)
        REQUIRE(std::real(arma::cdot(seqs.col(u), seqs.col(u))) ==
                Approx(budget).epsilon(1e-12));

    // random directions on the sphere: E |<u,v>|^2 / (|u||v|)^2 = 1/tau
    double acc = 0.0;
    std::size_t pairs = 0;
    for (arma::uword u = 0; u < seqs.n_cols; u++)
        for (arma::uword v = u + 1; v < seqs.n_cols; v++)
        {
            double c = std::abs(arma::cdot(seqs.col(u), seqs.col(v)));
            acc += (c * c) / (budget * budget);
            pairs++;
        }
    REQUIRE(pairs == 861);
    REQUIRE(acc / double(pairs) == Approx(1.0 / 8.0).epsilon(0.15));
}

TEST_CASE("estimation floor: limits and dominance over random designs")
{
    NetworkInstance net = generate(small_config(2, 2, 8, 4, false, 204));
    arma::mat w = make_weights(net, "unit");
    double lb = lower_bound_mse(net, 4, w).weighted_sum;
    NetworkInstance quiet = net;
    quiet.config.noise_power_mw = 1e-18;
    REQUIRE(lower_bound_mse(quiet, 4, w).weighted_sum < 1e-6 * lb);

    StreamRng seeds(205, stream::fuzz);
    for (int rep = 0; rep < 30; rep++)
    {
        std::size_t L = 1 + seeds.below(3), K = 1 + seeds.below(3);
        std::size_t tau = K + seeds.below(3);
        NetworkInstance inst = generate(small_config(L, K, 4, tau, false, 2050 + rep));
        arma::mat wi = make_weights(inst, rep % 2 ? "normalized" : "unit");
        double floor = lower_bound_mse(inst, tau, wi).weighted_sum;
        StreamRng rng(2060 + rep, stream::baseline);
        PilotConfiguration cfg = (rep % 2) ? baseline_random(inst, tau, rng)
                                           : baseline_orthogonal(inst, tau, rng);
        REQUIRE(mse_uncorrelated(inst, cfg, wi).weighted_sum >= floor * (1.0 - 1e-12));
    }
}

TEST_CASE("finite-antenna rate: zero data power and antenna scaling")
{
    NetworkInstance net = generate(small_config(2, 1, 4, 2, false, 206));
    StreamRng brng(10, stream::baseline);
    PilotConfiguration pc = baseline_random(net, 2, brng);
    StreamRng mc(11, stream::monte_carlo);
    REQUIRE(rate_monte_carlo(net, pc, 0, 0, 2000, mc, 0.0) == 0.0);

    // lone high-SNR user: quadrupling the antennas adds ~2 bits
    arma::cube beta(1, 1, 1);
    beta(0, 0, 0) = 1.0;
    auto small_m = oracle::manual_instance(1, 1, 16, beta, 1e-6, 10.0);
    auto big_m = oracle::manual_instance(1, 1, 64, beta, 1e-6, 10.0);
    arma::cx_mat phi(2, 1, arma::fill::ones);
    auto cfg = PilotConfiguration::make_arbitrary(1, 1, phi);
    double delta = rate_finite(big_m, cfg).per_user(0, 0) -
                   rate_finite(small_m, cfg).per_user(0, 0);
    REQUIRE(delta == Approx(2.0).margin(0.5));
}

TEST_CASE("config loading from disk and spec validation")
{
    fs::create_directories("test_out");
    const std::string good = "test_out/good.json";
    {
        std::ofstream f(good);
        f << R"({"network": {"cells": 2, "users_per_cell": 2, "antennas": 4, "pilot_length": 2},
                 "experiment": {"trials": 2, "seed": 3,
                                "algorithms": ["lower_bound", "baseline_orthogonal"]},
                 "output": {"dir": "test_out/from_file"}})";
    }
    ExperimentSpec spec = load_spec(good);
    REQUIRE(spec.network.cells == 2);
    REQUIRE(spec.trials == 2);
    REQUIRE(spec.output_dir == "test_out/from_file");

    const std::string broken = "test_out/broken.json";
    {
        std::ofstream f(broken);
        f << R"({"network": {"cells": 2, "users_per_cell": 2, "antennas": 4, "pilot_length": 2},
                 "experimnt": {}})";
    }
    REQUIRE_THROWS_AS(load_spec(broken), std::invalid_argument);

    const std::string garbled = "test_out/garbled.json";
    {
        std::ofstream f(garbled);
        f << "{ not json";
    }
    REQUIRE_THROWS_AS(load_spec(garbled), std::invalid_argument);
    REQUIRE_THROWS_AS(load_spec("test_out/does_not_exist.json"), std::invalid_argument);

    ExperimentSpec bad = tiny_spec("test_out/never");
    bad.weights = "mystery";
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = tiny_spec("test_out/never");
    bad.cdf_metrics = {"nope"};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = tiny_spec("test_out/never");
    bad.tau_sweep = {1}; // below users_per_cell while matching algorithms are on
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("experiment harness: files, invariants, and thread independence")
{
    ExperimentSpec s1 = tiny_spec("test_out/exp1");
    ExperimentResult res = run_experiment(s1);

    const std::size_t algos = known_algorithms().size();
    REQUIRE(res.rows.size() == 3 * 2 * algos);
    REQUIRE(fs::exists("test_out/exp1/summary.csv"));

    CsvTable summary = csv_read("test_out/exp1/summary.csv");
    REQUIRE(summary.rows.size() == res.rows.size());
    auto rows = index_summary(summary);

    // recompute the floor per (trial, tau) and check every consistency rule
    for (long long trial = 0; trial < 3; trial++)
        for (long long tau : {2LL, 3LL})
        {
            const auto &lb = rows.at({trial, tau, "lower_bound"});
            REQUIRE(lb[2] == 0.0);               // rel-dB against itself
            REQUIRE(lb[3] == rate_cap_bits);     // min rate pinned at the cap
            REQUIRE(lb[4] == rate_cap_bits * 4); // L*K users

            for (const std::string &algo : known_algorithms())
            {
                const auto &v = rows.at({trial, tau, algo});
                REQUIRE(v[1] == Approx(db_from_linear(v[0])).margin(1e-9));
                REQUIRE(v[2] == Approx(v[1] - lb[1]).margin(1e-9));
                REQUIRE(v[0] >= lb[0] * (1.0 - 1e-12));
                REQUIRE(v[3] >= 0.0);
                REQUIRE(v[3] <= rate_cap_bits);
                REQUIRE(v[4] >= v[3] * 4 - 1e-9);
            }

            // optimizers never end above the shared initialization
            const auto &init = rows.at({trial, tau, "baseline_orthogonal"});
            REQUIRE(rows.at({trial, tau, "nonorth_fp"})[0] <= init[0] * (1.0 + 1e-10));
            REQUIRE(rows.at({trial, tau, "orth_fp"})[0] <= init[0] * (1.0 + 1e-10));
            REQUIRE(rows.at({trial, tau, "maxmin_fp"})[3] >=
                    rows.at({trial, tau, "smart_assignment"})[3] * (1.0 - 1e-9));
        }

    // more pilot energy lowers the floor
    for (long long trial = 0; trial < 3; trial++)
        REQUIRE(rows.at({trial, 3, "lower_bound"})[0] < rows.at({trial, 2, "lower_bound"})[0]);

    // traces: entry 0 is the shared initialization, iterations match rows
    for (const std::string &algo : {std::string("nonorth_fp"), std::string("orth_fp")})
    {
        CsvTable trace = csv_read("test_out/exp1/trace_" + algo + ".csv");
        std::map<std::pair<long long, long long>, double> first;
        for (std::size_t r = 0; r < trace.rows.size(); r++)
        {
            long long trial = (long long)trace.number(r, "trial");
            long long tau = (long long)trace.number(r, "tau");
            if (trace.number(r, "iter") == 0)
                first[{trial, tau}] = trace.number(r, "objective");
        }
        for (long long trial = 0; trial < 3; trial++)
            for (long long tau : {2LL, 3LL})
                REQUIRE(first.at({trial, tau}) ==
                        Approx(rows.at({trial, tau, "baseline_orthogonal"})[0]).epsilon(1e-12));
    }
    REQUIRE(fs::exists("test_out/exp1/trace_maxmin_fp.csv"));

    // assignment files: one row per (trial, tau, cell, user), sane columns
    CsvTable ao = csv_read("test_out/exp1/assignment_orth_fp.csv");
    REQUIRE(ao.rows.size() == 3 * 2 * 4);
    for (std::size_t r = 0; r < ao.rows.size(); r++)
    {
        REQUIRE(ao.number(r, "pilot_index") < ao.number(r, "tau"));
        REQUIRE(ao.number(r, "power_mw") > 0.0);
        REQUIRE(ao.number(r, "power_mw") <= s1.network.max_power_mw * (1.0 + 1e-12));
    }
    CsvTable am = csv_read("test_out/exp1/assignment_maxmin_fp.csv");
    REQUIRE(am.rows.size() == 3 * 2 * 4);
    for (std::size_t r = 0; r < am.rows.size(); r++)
    {
        REQUIRE(am.number(r, "asymptotic_rate") >= 0.0);
        REQUIRE(am.number(r, "asymptotic_rate") <= rate_cap_bits);
    }

    // CDF files: per (algorithm, tau) group of `trials` ascending values
    for (const std::string &metric : s1.cdf_metrics)
    {
        CsvTable cdf = csv_read("test_out/exp1/cdf_" + metric + ".csv");
        REQUIRE(cdf.header == (std::vector<std::string>{"algorithm", "tau", "value",
                                                        "percentile"}));
        std::map<std::pair<std::string, long long>, std::vector<double>> groups;
        std::map<std::pair<std::string, long long>, std::vector<double>> pct;
        for (std::size_t r = 0; r < cdf.rows.size(); r++)
        {
            auto key = std::make_pair(cdf.rows[r][0], (long long)cdf.number(r, "tau"));
            groups[key].push_back(cdf.number(r, "value"));
            pct[key].push_back(cdf.number(r, "percentile"));
        }
        REQUIRE(groups.size() == algos * 2);
        for (const auto &[key, vals] : groups)
        {
            REQUIRE(vals.size() == 3);
            REQUIRE(std::is_sorted(vals.begin(), vals.end()));
            for (std::size_t i = 0; i < vals.size(); i++)
                REQUIRE(pct.at(key)[i] == Approx(double(i + 1) / 3.0).margin(1e-15));
        }
    }

    // a second worker thread must not change anything but wall times
    ExperimentSpec s2 = tiny_spec("test_out/exp2");
    s2.threads = 2;
    run_experiment(s2);
    CsvTable other = csv_read("test_out/exp2/summary.csv");
    REQUIRE(other.rows.size() == summary.rows.size());
    for (std::size_t r = 0; r < summary.rows.size(); r++)
        for (const std::string &col : {"trial", "tau", "algorithm", "weighted_sum_mse",
                                       "weighted_sum_mse_db", "mse_db_rel_lower_bound",
                                       "min_rate", "sum_rate", "iterations"})
        {
            std::size_t c = std::find(summary.header.begin(), summary.header.end(), col) -
                            summary.header.begin();
            REQUIRE(summary.rows[r][c] == other.rows[r][c]); // textual equality
        }
}

TEST_CASE("experiment harness: correlated instances and single algorithm runs")
{
    ExperimentSpec spec;
    spec.network = small_config(2, 2, 2, 2, true, 0);
    spec.network.correlation_magnitude = 0.5;
    spec.trials = 2;
    spec.master_seed = 21;
    spec.output_dir = "test_out/exp_corr";
    spec.threads = 1;
    spec.algorithms = {"lower_bound", "baseline_orthogonal", "nonorth_fp", "orth_fp"};
    ExperimentResult res = run_experiment(spec);
    REQUIRE(res.rows.size() == 2 * spec.algorithms.size());
    for (const ResultRow &r : res.rows)
    {
        if (r.algorithm == "lower_bound")
            continue;
        REQUIRE(r.weighted_sum_mse > 0.0);
        REQUIRE(std::isfinite(r.min_rate));
    }
}

TEST_CASE("self-check battery passes quietly")
{
    auto checks = run_validation(7);
    for (const auto &c : checks)
    {
        INFO(c.name << " observed " << c.observed << " tolerance " << c.tolerance);
        REQUIRE(c.pass);
    }
}

TEST_CASE("command line: exit codes and artifacts")
{
    fs::create_directories("test_out");
    {
        std::ofstream f("test_out/cli_good.json");
        f << R"({"network": {"cells": 2, "users_per_cell": 2, "antennas": 4, "pilot_length": 2},
                 "experiment": {"trials": 2, "seed": 4,
                                "algorithms": ["lower_bound", "baseline_orthogonal", "orth_fp"]},
                 "output": {"dir": "test_out/cli_run"}})";
    }
    {
        std::ofstream f("test_out/cli_bad.json");
        f << R"({"network": {"cells": 2, "users_per_cell": 2, "antennas": 4, "pilot_length": 2,
                             "bandwith_hz": 1e7}})";
    }

    REQUIRE(run_cli("run --config test_out/cli_good.json --out test_out/cli_run") == 0);
    REQUIRE(fs::exists("test_out/cli_run/summary.csv"));
    REQUIRE(run_cli("run --config test_out/cli_bad.json") == 1);
    REQUIRE(run_cli("run --config test_out/cli_missing.json") == 1);
    REQUIRE(run_cli("run") == 1); // --config is required
    REQUIRE(run_cli("bogus") == 1);
    REQUIRE(run_cli("sweep --config test_out/cli_good.json --tau 2,3 "
                    "--out test_out/cli_sweep --trials 1") == 0);
    REQUIRE(fs::exists("test_out/cli_sweep/summary.csv"));
    CsvTable t = csv_read("test_out/cli_sweep/summary.csv");
    std::set<long long> taus;
    for (std::size_t r = 0; r < t.rows.size(); r++)
        taus.insert((long long)t.number(r, "tau"));
    REQUIRE(taus == (std::set<long long>{2, 3}));
}
