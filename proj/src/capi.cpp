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

#include "cfsim.h"

#include "cfsim/config.hpp"
#include "cfsim/harness.hpp"
#include "cfsim/verify.hpp"

#include <cstring>
#include <new>
#include <string>

using namespace cfsim;

struct cfsim_plan
{
    PlanBuilder builder;
};

struct cfsim_result
{
    SweepResult sweep;
};

namespace
{

thread_local std::string g_last_error;

void set_error(const std::string &msg) { g_last_error = msg; }

// unified exception -> status mapping
template <typename Fn> cfsim_status guarded(Fn &&fn)
{
    try
    {
        return fn();
    }
    catch (const validation_error &e)
    {
        set_error(e.what());
        return CFSIM_ERR_INVALID;
    }
    catch (const std::bad_alloc &)
    {
        set_error("out of memory");
        return CFSIM_ERR_RUNTIME;
    }
    catch (const std::exception &e)
    {
        set_error(e.what());
        return CFSIM_ERR_RUNTIME;
    }
}

LogFn wrap_log(cfsim_log_fn log, void *user)
{
    if (!log)
        return {};
    return [log, user](const std::string &line) { log(line.c_str(), user); };
}

} // namespace

extern "C"
{

const char *cfsim_version(void) { return version_string(); }

const char *cfsim_status_name(cfsim_status status)
{
    switch (status)
    {
    case CFSIM_OK:
        return "ok";
    case CFSIM_ERR_INVALID:
        return "invalid";
    case CFSIM_ERR_RUNTIME:
        return "runtime";
    case CFSIM_ERR_VERIFY:
        return "verify";
    }
    return "unknown";
}

const char *cfsim_last_error(void) { return g_last_error.c_str(); }

cfsim_plan *cfsim_plan_new(void) { return new (std::nothrow) cfsim_plan(); }

void cfsim_plan_free(cfsim_plan *plan) { delete plan; }

cfsim_status cfsim_plan_load_file(cfsim_plan *plan, const char *path)
{
    if (!plan || !path)
    {
        set_error("null argument");
        return CFSIM_ERR_INVALID;
    }
    return guarded([&] {
        plan->builder.load_file(path);
        return CFSIM_OK;
    });
}

cfsim_status cfsim_plan_set(cfsim_plan *plan, const char *key, const char *value)
{
    if (!plan || !key || !value)
    {
        set_error("null argument");
        return CFSIM_ERR_INVALID;
    }
    return guarded([&] {
        plan->builder.set(key, value);
        return CFSIM_OK;
    });
}

int cfsim_plan_is_set(const cfsim_plan *plan, const char *key)
{
    if (!plan || !key)
        return 0;
    return plan->builder.is_set(key) ? 1 : 0;
}

cfsim_status cfsim_plan_validate(const cfsim_plan *plan)
{
    if (!plan)
    {
        set_error("null argument");
        return CFSIM_ERR_INVALID;
    }
    return guarded([&] {
        validate_plan(plan->builder.plan());
        return CFSIM_OK;
    });
}

cfsim_status cfsim_plan_format(const cfsim_plan *plan, char *buf, size_t cap, size_t *needed)
{
    if (!plan)
    {
        set_error("null argument");
        return CFSIM_ERR_INVALID;
    }
    return guarded([&]() -> cfsim_status {
        std::string text = format_plan(plan->builder.plan());
        if (needed)
            *needed = text.size() + 1;
        if (!buf)
            return CFSIM_OK;
        if (cap < text.size() + 1)
        {
            set_error("buffer too small for the formatted configuration");
            return CFSIM_ERR_INVALID;
        }
        std::memcpy(buf, text.data(), text.size());
        buf[text.size()] = '\0';
        return CFSIM_OK;
    });
}

cfsim_status cfsim_execute(const cfsim_plan *plan, const char *out_dir, cfsim_log_fn log,
                           void *log_user, cfsim_result **result)
{
    if (result)
        *result = nullptr;
    if (!plan)
    {
        set_error("null argument");
        return CFSIM_ERR_INVALID;
    }
    return guarded([&] {
        SweepResult sweep = run_sweep(plan->builder.plan(), wrap_log(log, log_user));
        if (out_dir)
            write_outputs(sweep, plan->builder.plan(), out_dir);
        if (result)
        {
            *result = new cfsim_result{std::move(sweep)};
        }
        return CFSIM_OK;
    });
}

void cfsim_result_free(cfsim_result *result) { delete result; }

size_t cfsim_result_num_cells(const cfsim_result *result)
{
    return result ? result->sweep.cells.size() : 0;
}

cfsim_status cfsim_result_cell_info(const cfsim_result *result, size_t cell, char *mode_buf,
                                    size_t mode_cap, double *delta_deg, double *kappa,
                                    size_t *num_drops, size_t *num_users)
{
    if (!result || cell >= result->sweep.cells.size())
    {
        set_error("cell index out of range");
        return CFSIM_ERR_INVALID;
    }
    const CellResult &c = result->sweep.cells[cell];
    if (mode_buf && mode_cap > 0)
    {
        std::string name = mode_name(c.spec.mode);
        size_t n = name.size() < mode_cap - 1 ? name.size() : mode_cap - 1;
        std::memcpy(mode_buf, name.data(), n);
        mode_buf[n] = '\0';
    }
    if (delta_deg)
        *delta_deg = c.spec.delta_deg;
    if (kappa)
        *kappa = c.spec.kappa;
    if (num_drops)
        *num_drops = c.drops.size();
    if (num_users)
        *num_users = c.drops.empty() ? 0 : c.drops[0].report.se_uatf.n_elem;
    return CFSIM_OK;
}

cfsim_status cfsim_result_user_se(const cfsim_result *result, size_t cell, size_t drop,
                                  size_t user, double *se_uatf, double *se_uatf_stderr,
                                  double *se_oer, double *se_oer_stderr)
{
    if (!result || cell >= result->sweep.cells.size())
    {
        set_error("cell index out of range");
        return CFSIM_ERR_INVALID;
    }
    const CellResult &c = result->sweep.cells[cell];
    if (drop >= c.drops.size())
    {
        set_error("drop index out of range");
        return CFSIM_ERR_INVALID;
    }
    const RateReport &r = c.drops[drop].report;
    if (user >= r.se_uatf.n_elem)
    {
        set_error("user index out of range");
        return CFSIM_ERR_INVALID;
    }
    if (se_uatf)
        *se_uatf = r.se_uatf(user);
    if (se_uatf_stderr)
        *se_uatf_stderr = r.se_uatf_err(user);
    if (se_oer)
        *se_oer = r.se_oer(user);
    if (se_oer_stderr)
        *se_oer_stderr = r.se_oer_err(user);
    return CFSIM_OK;
}

cfsim_status cfsim_result_cell_mean(const cfsim_result *result, size_t cell, double *mean_uatf,
                                    double *stderr_uatf, double *mean_oer, double *stderr_oer)
{
    if (!result || cell >= result->sweep.cells.size())
    {
        set_error("cell index out of range");
        return CFSIM_ERR_INVALID;
    }
    const CellResult &c = result->sweep.cells[cell];
    if (mean_uatf)
        *mean_uatf = c.mean_uatf();
    if (stderr_uatf)
        *stderr_uatf = c.stderr_uatf();
    if (mean_oer)
        *mean_oer = c.mean_oer();
    if (stderr_oer)
        *stderr_oer = c.stderr_oer();
    return CFSIM_OK;
}

cfsim_status cfsim_verify(cfsim_log_fn log, void *log_user, int *checks_failed)
{
    int failed = 0;
    cfsim_status st = guarded([&] {
        std::vector<CheckResult> results = run_verification(wrap_log(log, log_user), {});
        for (const CheckResult &r : results)
            if (!r.passed)
                failed++;
        return CFSIM_OK;
    });
    if (checks_failed)
        *checks_failed = failed;
    if (st != CFSIM_OK)
        return st;
    if (failed > 0)
    {
        set_error(std::to_string(failed) + " verification check(s) failed");
        return CFSIM_ERR_VERIFY;
    }
    return CFSIM_OK;
}

} // extern "C"
