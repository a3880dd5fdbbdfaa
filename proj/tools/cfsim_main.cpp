// SPDX-License-Identifier: Apache-2.0
//
// cfsim: cell-free massive MIMO uplink simulator with imperfect phase tracking
// Copyright (C) 2026 cfsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Command line front end. Talks to the simulator exclusively through the
// shared-library C interface.

#include "cfsim.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace
{

void print_log_line(const char *line, void *)
{
    std::printf("%s\n", line);
    std::fflush(stdout);
}

int fail_with(cfsim_status st)
{
    std::fprintf(stderr, "error (%s): %s\n", cfsim_status_name(st), cfsim_last_error());
    return int(st);
}

std::string join_doubles(const std::vector<double> &v)
{
    std::string out;
    char buf[40];
    for (size_t i = 0; i < v.size(); i++)
    {
        if (i)
            out += ",";
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out += buf;
    }
    return out;
}

std::string join_strings(const std::vector<std::string> &v)
{
    std::string out;
    for (size_t i = 0; i < v.size(); i++)
    {
        if (i)
            out += ",";
        out += v[i];
    }
    return out;
}

struct PlanDeleter
{
    void operator()(cfsim_plan *p) const { cfsim_plan_free(p); }
};
using PlanPtr = std::unique_ptr<cfsim_plan, PlanDeleter>;

struct CommonArgs
{
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::vector<double> delta_deg;
    std::vector<double> kappa;
    std::vector<std::string> modes;
    std::uint64_t drops = 0, trials = 0, inner = 0, seed = 0, threads = 0;
    bool drops_given = false, trials_given = false, inner_given = false;
    bool seed_given = false, threads_given = false, prelog = false;
};

void add_common_options(CLI::App *cmd, CommonArgs &a)
{
    cmd->add_option("-c,--config", a.configs, "configuration file(s), applied in order");
    cmd->add_option("--set", a.sets, "override one key, as section.key=value")
        ->type_name("KEY=VALUE");
    cmd->add_option("--delta-deg", a.delta_deg,
                    "phase error bound grid in degrees, 0 to 180");
    cmd->add_option("--kappa", a.kappa, "Rician factor grid (linear)");
    cmd->add_option("--mode", a.modes,
                    "mode(s) as <arch>:<estimator>, e.g. distributed:lmmse");
    cmd->add_option("--drops", a.drops, "network drops")->each([&](const std::string &) {
        a.drops_given = true;
    });
    cmd->add_option("--trials", a.trials, "fading trials per drop")
        ->each([&](const std::string &) { a.trials_given = true; });
    cmd->add_option("--inner-samples", a.inner, "inner draws for the team statistics")
        ->each([&](const std::string &) { a.inner_given = true; });
    cmd->add_option("--seed", a.seed, "master random seed")->each([&](const std::string &) {
        a.seed_given = true;
    });
    cmd->add_option("--threads", a.threads, "worker threads (0 = all cores)")
        ->each([&](const std::string &) { a.threads_given = true; });
    cmd->add_flag("--overhead-prelog", a.prelog,
                  "scale rates by the pilot overhead factor (1 - tau_p/tau_c)");
}

cfsim_status build_plan(const CommonArgs &a, PlanPtr &plan)
{
    plan.reset(cfsim_plan_new());
    if (!plan)
    {
        std::fprintf(stderr, "error: allocation failed\n");
        return CFSIM_ERR_RUNTIME;
    }
    for (const std::string &path : a.configs)
    {
        cfsim_status st = cfsim_plan_load_file(plan.get(), path.c_str());
        if (st != CFSIM_OK)
            return st;
    }
    for (const std::string &kv : a.sets)
    {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
        {
            std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n",
                         kv.c_str());
            return CFSIM_ERR_INVALID;
        }
        cfsim_status st = cfsim_plan_set(plan.get(), kv.substr(0, eq).c_str(),
                                         kv.substr(eq + 1).c_str());
        if (st != CFSIM_OK)
            return st;
    }

    cfsim_status st = CFSIM_OK;
    auto set = [&](const char *key, const std::string &value) {
        if (st == CFSIM_OK)
            st = cfsim_plan_set(plan.get(), key, value.c_str());
    };
    if (!a.delta_deg.empty())
        set("experiment.delta_deg", join_doubles(a.delta_deg));
    if (!a.kappa.empty())
        set("experiment.kappa", join_doubles(a.kappa));
    if (!a.modes.empty())
        set("experiment.modes", join_strings(a.modes));
    if (a.drops_given)
        set("experiment.drops", std::to_string(a.drops));
    if (a.trials_given)
        set("experiment.trials", std::to_string(a.trials));
    if (a.inner_given)
        set("experiment.inner_samples", std::to_string(a.inner));
    if (a.seed_given)
        set("scenario.seed", std::to_string(a.seed));
    if (a.threads_given)
        set("experiment.threads", std::to_string(a.threads));
    if (a.prelog)
        set("experiment.overhead_prelog", "true");
    return st;
}

int execute_and_report(const PlanPtr &plan, const std::string &out_dir, bool quiet_progress)
{
    cfsim_status st = cfsim_plan_validate(plan.get());
    if (st != CFSIM_OK)
        return fail_with(st);

    cfsim_result *result = nullptr;
    st = cfsim_execute(plan.get(), out_dir.empty() ? nullptr : out_dir.c_str(),
                       quiet_progress ? nullptr : print_log_line, nullptr, &result);
    if (st != CFSIM_OK)
        return fail_with(st);

    std::printf("\n%-28s %8s %10s %22s %22s\n", "mode", "kappa", "delta_deg", "SE uatf [b/s/Hz]",
                "SE oer [b/s/Hz]");
    size_t cells = cfsim_result_num_cells(result);
    for (size_t i = 0; i < cells; i++)
    {
        char mode[64];
        double delta = 0, kappa = 0;
        cfsim_result_cell_info(result, i, mode, sizeof(mode), &delta, &kappa, nullptr, nullptr);
        double mu = 0, eu = 0, mo = 0, eo = 0;
        cfsim_result_cell_mean(result, i, &mu, &eu, &mo, &eo);
        std::printf("%-28s %8g %10g %12.4f +- %-7.4f %12.4f +- %-7.4f\n", mode, kappa, delta, mu,
                    eu, mo, eo);
    }
    if (!out_dir.empty())
        std::printf("\noutputs written to %s\n", out_dir.c_str());
    cfsim_result_free(result);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"cell-free massive MIMO uplink simulator with imperfect phase tracking"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, print_args;
    std::string run_out = "out", sweep_out = "out";

    CLI::App *run = app.add_subcommand("run", "evaluate a single (delta, kappa, mode) cell");
    add_common_options(run, run_args);
    run->add_option("-o,--out", run_out, "output directory ('' = no files)");

    CLI::App *sweep = app.add_subcommand("sweep", "evaluate the full configured grid");
    add_common_options(sweep, sweep_args);
    sweep->add_option("-o,--out", sweep_out, "output directory ('' = no files)");

    CLI::App *print = app.add_subcommand("print-config", "echo the resolved configuration");
    add_common_options(print, print_args);

    CLI::App *verify = app.add_subcommand("verify", "run the built-in self checks");

    CLI11_PARSE(app, argc, argv);

    if (verify->parsed())
    {
        int failed = 0;
        cfsim_status st = cfsim_verify(print_log_line, nullptr, &failed);
        if (st == CFSIM_OK)
        {
            std::printf("all checks passed\n");
            return 0;
        }
        return fail_with(st);
    }

    if (print->parsed())
    {
        PlanPtr plan;
        cfsim_status st = build_plan(print_args, plan);
        if (st != CFSIM_OK)
            return fail_with(st);
        st = cfsim_plan_validate(plan.get());
        if (st != CFSIM_OK)
            return fail_with(st);
        size_t needed = 0;
        cfsim_plan_format(plan.get(), nullptr, 0, &needed);
        std::vector<char> buf(needed);
        cfsim_plan_format(plan.get(), buf.data(), buf.size(), nullptr);
        std::fputs(buf.data(), stdout);
        return 0;
    }

    if (run->parsed())
    {
        PlanPtr plan;
        cfsim_status st = build_plan(run_args, plan);
        if (st != CFSIM_OK)
            return fail_with(st);

        // a run is one cell: all grids must be single valued
        auto single = [&](const char *what, bool ok) {
            if (!ok)
                std::fprintf(stderr,
                             "error: 'run' needs exactly one %s (use --%s or narrow the config); "
                             "use 'sweep' for grids\n",
                             what, what);
            return ok;
        };
        // format the resolved plan and count grid entries via the C API
        size_t needed = 0;
        cfsim_plan_format(plan.get(), nullptr, 0, &needed);
        std::string text(needed, '\0');
        cfsim_plan_format(plan.get(), text.data(), text.size(), nullptr);
        auto count_list = [&](const std::string &key) {
            auto pos = text.find("\n" + key + " = ");
            if (pos == std::string::npos)
                return size_t(0);
            pos += key.size() + 4;
            auto end = text.find('\n', pos);
            std::string line = text.substr(pos, end - pos);
            if (line.empty())
                return size_t(0);
            return size_t(std::count(line.begin(), line.end(), ',') + 1);
        };
        size_t n_delta = count_list("delta_deg");
        size_t n_kappa = count_list("kappa");
        size_t n_modes = count_list("modes");
        if (!single("delta-deg", n_delta == 1) || !single("kappa", n_kappa <= 1) ||
            !single("mode", n_modes == 1))
            return int(CFSIM_ERR_INVALID);

        return execute_and_report(plan, run_out, false);
    }

    // sweep
    PlanPtr plan;
    cfsim_status st = build_plan(sweep_args, plan);
    if (st != CFSIM_OK)
        return fail_with(st);
    if (!cfsim_plan_is_set(plan.get(), "experiment.drops"))
    {
        st = cfsim_plan_set(plan.get(), "experiment.drops", "10");
        if (st != CFSIM_OK)
            return fail_with(st);
    }
    return execute_and_report(plan, sweep_out, false);
}
