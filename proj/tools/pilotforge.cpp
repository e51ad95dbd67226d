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

#include <pilotforge/experiment.hpp>
#include <pilotforge/validate.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace
{

struct Overrides
{
    std::string algo;
    long long trials = 0;
    unsigned long long seed = 0;
    std::string out;
    CLI::Option *algo_opt = nullptr, *trials_opt = nullptr, *seed_opt = nullptr,
                *out_opt = nullptr;
};

void add_overrides(CLI::App *cmd, Overrides &o)
{
    o.algo_opt = cmd->add_option("--algo", o.algo, "restrict the run to a single algorithm");
    o.trials_opt = cmd->add_option("--trials", o.trials, "number of network realizations")
                       ->check(CLI::PositiveNumber);
    o.seed_opt = cmd->add_option("--seed", o.seed, "master seed");
    o.out_opt = cmd->add_option("--out", o.out, "output directory");
}

void apply_overrides(pilotforge::ExperimentSpec &spec, const Overrides &o)
{
    if (o.algo_opt->count())
        spec.algorithms = {o.algo};
    if (o.trials_opt->count())
        spec.trials = std::size_t(o.trials);
    if (o.seed_opt->count())
        spec.master_seed = o.seed;
    if (o.out_opt->count())
        spec.output_dir = o.out;
}

int execute(const pilotforge::ExperimentSpec &spec)
{
    pilotforge::ExperimentResult res = pilotforge::run_experiment(spec);
    for (const auto &f : res.files)
        std::printf("wrote %s\n", f.c_str());
    std::printf("ok: %zu summary rows (%zu trials)\n", res.rows.size(), spec.trials);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"coordinated uplink pilot design simulator for multicell massive MIMO"};
    app.require_subcommand(1);

    CLI::App *run = app.add_subcommand("run", "run the experiment described by a config file");
    std::string run_config;
    run->add_option("--config", run_config, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    Overrides run_ov;
    add_overrides(run, run_ov);

    CLI::App *sweep =
        app.add_subcommand("sweep", "run the experiment across a list of pilot lengths");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "JSON configuration file (defaults when absent)")
        ->check(CLI::ExistingFile);
    std::vector<std::size_t> taus;
    sweep->add_option("--tau", taus, "comma-separated pilot lengths")
        ->required()
        ->delimiter(',');
    Overrides sweep_ov;
    add_overrides(sweep, sweep_ov);

    CLI::App *validate = app.add_subcommand("validate", "run the built-in oracle suite");
    unsigned long long vseed = 7;
    validate->add_option("--seed", vseed, "seed for the randomized checks");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // malformed invocation is a configuration error
    }

    try
    {
        if (run->parsed())
        {
            pilotforge::ExperimentSpec spec = pilotforge::load_spec(run_config);
            apply_overrides(spec, run_ov);
            spec.validate();
            return execute(spec);
        }
        if (sweep->parsed())
        {
            pilotforge::ExperimentSpec spec;
            if (sweep_config.empty())
                spec.network.validate();
            else
                spec = pilotforge::load_spec(sweep_config);
            spec.tau_sweep = taus;
            apply_overrides(spec, sweep_ov);
            spec.validate();
            return execute(spec);
        }
        bool ok = pilotforge::print_validation(pilotforge::run_validation(vseed));
        return ok ? 0 : 2;
    }
    catch (const std::invalid_argument &e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
}
