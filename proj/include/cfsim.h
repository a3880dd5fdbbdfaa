/* SPDX-License-Identifier: Apache-2.0
 *
 * cfsim: cell-free massive MIMO uplink simulator with imperfect phase tracking
 * Copyright (C) 2026 cfsim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * ------------------------------------------------------------------------
 *
 * C interface of the simulator shared library. All entry points return a
 * status code; on anything but CFSIM_OK a description of the failure is
 * available from cfsim_last_error() on the same thread.
 */

#ifndef CFSIM_H
#define CFSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C"
{
#endif

typedef enum cfsim_status
{
    CFSIM_OK = 0,
    CFSIM_ERR_INVALID = 1, /* bad configuration or bad arguments */
    CFSIM_ERR_RUNTIME = 2, /* numerical or I/O failure while running */
    CFSIM_ERR_VERIFY = 3   /* self-verification found a failing check */
} cfsim_status;

/* experiment description (opaque) */
typedef struct cfsim_plan cfsim_plan;
/* finished sweep results (opaque) */
typedef struct cfsim_result cfsim_result;

/* progress callback; line has no trailing newline, user is passed through */
typedef void (*cfsim_log_fn)(const char *line, void *user);

const char *cfsim_version(void);
const char *cfsim_status_name(cfsim_status status);

/* thread-local message for the most recent failure on this thread */
const char *cfsim_last_error(void);

/* ---- plan lifecycle ---------------------------------------------------- */

/* starts from built-in defaults; never fails except on allocation */
cfsim_plan *cfsim_plan_new(void);
void cfsim_plan_free(cfsim_plan *plan);

/* layer a config file over the current plan state */
cfsim_status cfsim_plan_load_file(cfsim_plan *plan, const char *path);

/* set one "section.key" to a value given in config-file syntax */
cfsim_status cfsim_plan_set(cfsim_plan *plan, const char *key, const char *value);

/* 1 if the key was set explicitly (file or cfsim_plan_set), else 0 */
int cfsim_plan_is_set(const cfsim_plan *plan, const char *key);

cfsim_status cfsim_plan_validate(const cfsim_plan *plan);

/* canonical config text. The needed size (terminator included) is stored in
 * *needed if given. With buf == NULL only the size query runs; a non-NULL
 * buf shorter than needed is an error, never a truncation. */
cfsim_status cfsim_plan_format(const cfsim_plan *plan, char *buf, size_t cap, size_t *needed);

/* ---- execution ----------------------------------------------------------*/

/* Runs every cell of the plan's grid. out_dir may be NULL to skip writing
 * files. On success, *result (if non-NULL) owns the in-memory results. */
cfsim_status cfsim_execute(const cfsim_plan *plan, const char *out_dir, cfsim_log_fn log,
                           void *log_user, cfsim_result **result);

void cfsim_result_free(cfsim_result *result);

size_t cfsim_result_num_cells(const cfsim_result *result);

/* mode_buf (if non-NULL) receives "arch:estimator", truncated to mode_cap */
cfsim_status cfsim_result_cell_info(const cfsim_result *result, size_t cell, char *mode_buf,
                                    size_t mode_cap, double *delta_deg, double *kappa,
                                    size_t *num_drops, size_t *num_users);

/* per-user spectral efficiencies of one (cell, drop) */
cfsim_status cfsim_result_user_se(const cfsim_result *result, size_t cell, size_t drop,
                                  size_t user, double *se_uatf, double *se_uatf_stderr,
                                  double *se_oer, double *se_oer_stderr);

/* cell aggregates over all drops and users */
cfsim_status cfsim_result_cell_mean(const cfsim_result *result, size_t cell, double *mean_uatf,
                                    double *stderr_uatf, double *mean_oer, double *stderr_oer);

/* ---- self verification -------------------------------------------------*/

/* Runs the built-in checks; each one is reported through log. Returns
 * CFSIM_OK when all pass, CFSIM_ERR_VERIFY otherwise; *checks_failed (if
 * non-NULL) receives the number of failing checks. */
cfsim_status cfsim_verify(cfsim_log_fn log, void *log_user, int *checks_failed);

#ifdef __cplusplus
}
#endif

#endif /* CFSIM_H */
