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

#ifndef CFSIM_CONFIG_HPP
#define CFSIM_CONFIG_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cfsim
{

enum class PilotScheme
{
    greedy,     // interference-aware assignment at the strongest AP
    round_robin // user k gets pilot k mod tau_p
};

enum class PowerControl
{
    full,      // everybody transmits at max_power_w
    fractional // data power scaled by (b_min / b_k)^exponent
};

enum class Arch
{
    centralized,
    distributed
};

enum class Estimator
{
    lmmse,         // phase estimate with known error bound
    perfect_phase, // limit of exact tracking, conditions on the true phase
    phase_blind    // limit of useless tracking, zero-mean estimate
};

enum class PiGranularity
{
    per_trial, // inner statistics conditioned on each trial's phase estimates
    per_drop   // unconditional inner statistics, shared by all trials of a drop
};

struct Mode
{
    Arch arch = Arch::centralized;
    Estimator estimator = Estimator::lmmse;

    bool operator==(const Mode &o) const { return arch == o.arch && estimator == o.estimator; }
};

// Deployment and propagation parameters. Defaults reproduce the reference
// urban macro setup: 100 four-antenna APs and 40 users on a 1 km wrap-around
// square, 100 MHz at 5 GHz, 100 mW per device, 200-symbol coherence blocks
// with 5 pilots.
struct ScenarioConfig
{
    double area_side_m = 1000.0;
    std::uint64_t num_aps = 100;       // L
    std::uint64_t num_users = 40;      // K
    std::uint64_t antennas_per_ap = 4; // N
    double bandwidth_hz = 100.0e6;
    double carrier_freq_ghz = 5.0;
    double max_power_w = 0.1;
    std::uint64_t coherence_symbols = 200; // tau_c
    std::uint64_t pilot_symbols = 5;       // tau_p
    double height_diff_m = 11.0;           // AP height above user plane
    double shadow_std_db = 8.0;
    double antenna_spacing_wl = 0.5; // element spacing in wavelengths
    double angular_spread_deg = 15.0;
    double noise_figure_db = 7.0;
    double rician_kappa = 5.0;     // LoS-to-scatter power ratio, linear
    std::uint64_t cluster_size = 0; // serving APs per user, 0 = all
    PilotScheme pilot_scheme = PilotScheme::greedy;
    PowerControl power_control = PowerControl::full;
    double power_exponent = 0.5;
    std::uint64_t hold_phase_blocks = 1; // trials sharing one phase draw
    std::uint64_t seed = 1;              // master seed for the whole run
};

// Full description of an experiment: the scenario plus the sweep grids and
// Monte Carlo budgets. A "cell" is one (delta, kappa, mode) combination.
struct ExperimentPlan
{
    ScenarioConfig scenario;
    std::vector<double> delta_deg = {0.0, 15.0, 30.0, 45.0, 90.0, 180.0};
    std::vector<double> kappa; // empty = use scenario.rician_kappa
    std::vector<Mode> modes = {{Arch::centralized, Estimator::lmmse},
                               {Arch::distributed, Estimator::lmmse}};
    std::uint64_t num_drops = 1;
    std::uint64_t trials_per_drop = 1000;
    std::uint64_t inner_samples = 200; // draws behind each team-statistics estimate
    PiGranularity pi_granularity = PiGranularity::per_trial;
    bool overhead_prelog = false; // multiply SE by (1 - tau_p/tau_c)
    std::uint64_t threads = 1;    // 0 = all hardware threads
    std::string dump_estimates;   // binary channel-estimate dump, empty = off
    std::string diagnostics_log;  // text diagnostics, empty = off
};

std::string to_string(PilotScheme s);
std::string to_string(PowerControl s);
std::string to_string(Arch a);
std::string to_string(Estimator e);
std::string to_string(PiGranularity g);
std::string mode_name(const Mode &m); // "centralized:lmmse"
Mode parse_mode(const std::string &text);

// Builds a plan from defaults, config files and dotted-key overrides.
// All mutators throw validation_error with the offending key in the message.
class PlanBuilder
{
  public:
    void load_file(const std::string &path);
    void load_text(const std::string &text, const std::string &origin = "<text>");

    // key is "section.name" using the same names as the config file
    void set(const std::string &key, const std::string &value);

    bool is_set(const std::string &key) const { return seen.count(key) != 0; }

    const ExperimentPlan &plan() const { return p; }
    ExperimentPlan &plan() { return p; }

  private:
    ExperimentPlan p;
    std::set<std::string> seen;
};

// Throw validation_error naming the first violated rule.
void validate_scenario(const ScenarioConfig &scenario);
void validate_plan(const ExperimentPlan &plan);

// Kappa grid with the scenario fallback applied.
std::vector<double> effective_kappa_grid(const ExperimentPlan &plan);

// Canonical text form: parsing it back yields an identical plan, and its
// FNV-1a hash identifies the configuration in output manifests.
std::string format_plan(const ExperimentPlan &plan);
std::uint64_t plan_hash(const ExperimentPlan &plan);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

} // namespace cfsim

#endif
