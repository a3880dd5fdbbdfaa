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

#ifndef CFSIM_HARNESS_HPP
#define CFSIM_HARNESS_HPP

#include "cfsim/config.hpp"
#include "cfsim/rates.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cfsim
{

using LogFn = std::function<void(const std::string &)>;

// One grid point of the sweep.
struct CellSpec
{
    Mode mode;
    double delta_deg = 0.0;
    double kappa = 5.0;
};

struct DropResult
{
    RateReport report;
    std::uint64_t distance_clamped = 0;
    std::uint64_t est_ill_conditioned = 0;
    double max_team_residual = 0.0;
    double min_team_rcond = 1.0;
    double seconds = 0.0;
};

struct CellResult
{
    CellSpec spec;
    std::vector<DropResult> drops;

    // convenience reductions over (drop, user)
    double mean_uatf() const;
    double mean_oer() const;
    double stderr_uatf() const; // standard error of mean_uatf
    double stderr_oer() const;
    arma::vec pooled_uatf() const; // drops * K values, drop-major
    arma::vec pooled_oer() const;
};

struct SweepResult
{
    std::vector<CellResult> cells;
    std::string config_echo;
    std::uint64_t config_hash = 0;
    std::string version;
};

// Monte Carlo evaluation of one cell. Trials are distributed over
// plan.threads workers; every random draw is tied to (seed, drop, trial,
// purpose), so the result is bit-identical for any thread count.
CellResult run_cell(const ExperimentPlan &plan, const CellSpec &spec, const LogFn &log = {});

// All cells of the grid (mode-major, then kappa, then delta order).
SweepResult run_sweep(const ExperimentPlan &plan, const LogFn &log = {});

// Sorted samples against cumulative level (i+1)/n; n x 2. Throws on empty.
arma::mat empirical_cdf(const arma::vec &samples);

struct SummaryRow
{
    Mode mode;
    double kappa = 0.0, delta_deg = 0.0;
    double mean_uatf = 0.0, stderr_uatf = 0.0;
    double mean_oer = 0.0, stderr_oer = 0.0;
    std::uint64_t drops = 0, trials = 0;
};

// One row per cell, sorted by (arch, estimator, kappa, delta).
std::vector<SummaryRow> summarize(const SweepResult &result);

// summary.csv, per-cell rate and CDF tables, manifest.txt. The CSV content
// is a pure function of the plan; wall-clock timings go to the manifest
// only. Creates the directory if needed.
void write_outputs(const SweepResult &result, const ExperimentPlan &plan,
                   const std::string &out_dir);

} // namespace cfsim

#endif
