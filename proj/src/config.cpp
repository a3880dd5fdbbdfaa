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

#include "cfsim/config.hpp"
#include "cfsim/common.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cfsim
{

const char *version_string() { return "0.1.0"; }

std::string to_string(PilotScheme s)
{
    return s == PilotScheme::greedy ? "greedy" : "round-robin";
}

std::string to_string(PowerControl s)
{
    return s == PowerControl::full ? "full" : "fractional";
}

std::string to_string(Arch a)
{
    return a == Arch::centralized ? "centralized" : "distributed";
}

std::string to_string(Estimator e)
{
    switch (e)
    {
    case Estimator::lmmse:
        return "lmmse";
    case Estimator::perfect_phase:
        return "perfect-phase";
    default:
        return "phase-blind";
    }
}

std::string to_string(PiGranularity g)
{
    return g == PiGranularity::per_trial ? "per-trial" : "per-drop";
}

std::string mode_name(const Mode &m)
{
    return to_string(m.arch) + ":" + to_string(m.estimator);
}

Mode parse_mode(const std::string &text)
{
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw validation_error("mode '" + text + "': expected <arch>:<estimator>");
    std::string a = text.substr(0, colon), e = text.substr(colon + 1);
    Mode m;
    if (a == "centralized")
        m.arch = Arch::centralized;
    else if (a == "distributed")
        m.arch = Arch::distributed;
    else
        throw validation_error("mode '" + text + "': unknown architecture '" + a + "'");
    if (e == "lmmse")
        m.estimator = Estimator::lmmse;
    else if (e == "perfect-phase")
        m.estimator = Estimator::perfect_phase;
    else if (e == "phase-blind")
        m.estimator = Estimator::phase_blind;
    else
        throw validation_error("mode '" + text + "': unknown estimator '" + e + "'");
    return m;
}

// ---- low level parsing helpers -------------------------------------------

static std::string trim(const std::string &s)
{
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

static double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return x;
    }
    catch (const std::exception &)
    {
        throw validation_error(key + ": expected a number, got '" + v + "'");
    }
}

static std::uint64_t parse_u64(const std::string &key, const std::string &v)
{
    if (v.empty() || v[0] == '-')
        throw validation_error(key + ": expected a non-negative integer, got '" + v + "'");
    try
    {
        size_t pos = 0;
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return x;
    }
    catch (const std::exception &)
    {
        throw validation_error(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

static bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw validation_error(key + ": expected true/false, got '" + v + "'");
}

static std::vector<std::string> split_list(const std::string &v)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : v)
    {
        if (c == ',' || c == ' ' || c == '\t')
        {
            if (!cur.empty())
                out.push_back(cur), cur.clear();
        }
        else
            cur += c;
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

static std::vector<double> parse_double_list(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    for (const auto &tok : split_list(v))
        out.push_back(parse_double(key, tok));
    return out;
}

// shortest representation that parses back to the same double
std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// ---- PlanBuilder ----------------------------------------------------------

void PlanBuilder::set(const std::string &key, const std::string &raw)
{
    const std::string v = trim(raw);
    ScenarioConfig &s = p.scenario;

    if (key == "scenario.area_side_m")
        s.area_side_m = parse_double(key, v);
    else if (key == "scenario.num_aps")
        s.num_aps = parse_u64(key, v);
    else if (key == "scenario.num_users")
        s.num_users = parse_u64(key, v);
    else if (key == "scenario.antennas_per_ap")
        s.antennas_per_ap = parse_u64(key, v);
    else if (key == "scenario.bandwidth_hz")
        s.bandwidth_hz = parse_double(key, v);
    else if (key == "scenario.carrier_freq_ghz")
        s.carrier_freq_ghz = parse_double(key, v);
    else if (key == "scenario.max_power_w")
        s.max_power_w = parse_double(key, v);
    else if (key == "scenario.coherence_symbols")
        s.coherence_symbols = parse_u64(key, v);
    else if (key == "scenario.pilot_symbols")
        s.pilot_symbols = parse_u64(key, v);
    else if (key == "scenario.height_diff_m")
        s.height_diff_m = parse_double(key, v);
    else if (key == "scenario.shadow_std_db")
        s.shadow_std_db = parse_double(key, v);
    else if (key == "scenario.antenna_spacing_wl")
        s.antenna_spacing_wl = parse_double(key, v);
    else if (key == "scenario.angular_spread_deg")
        s.angular_spread_deg = parse_double(key, v);
    else if (key == "scenario.noise_figure_db")
        s.noise_figure_db = parse_double(key, v);
    else if (key == "scenario.rician_kappa")
        s.rician_kappa = parse_double(key, v);
    else if (key == "scenario.cluster_size")
        s.cluster_size = (v == "all") ? 0 : parse_u64(key, v);
    else if (key == "scenario.pilot_assignment")
    {
        if (v == "greedy")
            s.pilot_scheme = PilotScheme::greedy;
        else if (v == "round-robin")
            s.pilot_scheme = PilotScheme::round_robin;
        else
            throw validation_error(key + ": expected greedy or round-robin, got '" + v + "'");
    }
    else if (key == "scenario.power_control")
    {
        if (v == "full")
            s.power_control = PowerControl::full;
        else if (v == "fractional")
            s.power_control = PowerControl::fractional;
        else
            throw validation_error(key + ": expected full or fractional, got '" + v + "'");
    }
    else if (key == "scenario.power_exponent")
        s.power_exponent = parse_double(key, v);
    else if (key == "scenario.hold_phase_blocks")
        s.hold_phase_blocks = parse_u64(key, v);
    else if (key == "scenario.seed")
        s.seed = parse_u64(key, v);
    else if (key == "experiment.delta_deg")
        p.delta_deg = parse_double_list(key, v);
    else if (key == "experiment.kappa")
        p.kappa = parse_double_list(key, v);
    else if (key == "experiment.modes")
    {
        p.modes.clear();
        for (const auto &tok : split_list(v))
            p.modes.push_back(parse_mode(tok));
    }
    else if (key == "experiment.drops")
        p.num_drops = parse_u64(key, v);
    else if (key == "experiment.trials")
        p.trials_per_drop = parse_u64(key, v);
    else if (key == "experiment.inner_samples")
        p.inner_samples = parse_u64(key, v);
    else if (key == "experiment.pi_estimate")
    {
        if (v == "per-trial")
            p.pi_granularity = PiGranularity::per_trial;
        else if (v == "per-drop")
            p.pi_granularity = PiGranularity::per_drop;
        else
            throw validation_error(key + ": expected per-trial or per-drop, got '" + v + "'");
    }
    else if (key == "experiment.overhead_prelog")
        p.overhead_prelog = parse_bool(key, v);
    else if (key == "experiment.threads")
        p.threads = parse_u64(key, v);
    else if (key == "debug.dump_estimates")
        p.dump_estimates = v;
    else if (key == "debug.diagnostics_log")
        p.diagnostics_log = v;
    else
        throw validation_error("unknown configuration key '" + key + "'");

    seen.insert(key);
}

void PlanBuilder::load_text(const std::string &text, const std::string &origin)
{
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line))
    {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw validation_error(origin + ":" + std::to_string(lineno) + ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scenario" && section != "experiment" && section != "debug")
                throw validation_error(origin + ":" + std::to_string(lineno) + ": unknown section '" + section + "'");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        if (section.empty())
            throw validation_error(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        set(section + "." + key, val);
    }
}

void PlanBuilder::load_file(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw validation_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    load_text(buf.str(), path);
}

// ---- validation -----------------------------------------------------------

static void check(bool ok, const std::string &msg)
{
    if (!ok)
        throw validation_error(msg);
}

void validate_scenario(const ScenarioConfig &s)
{
    check(s.area_side_m > 0, "scenario.area_side_m: must be positive");
    check(s.num_aps >= 1, "scenario.num_aps: must be at least 1");
    check(s.num_users >= 1, "scenario.num_users: must be at least 1");
    check(s.antennas_per_ap >= 1, "scenario.antennas_per_ap: must be at least 1");
    check(s.bandwidth_hz > 0, "scenario.bandwidth_hz: must be positive");
    check(s.carrier_freq_ghz > 0, "scenario.carrier_freq_ghz: must be positive");
    check(s.max_power_w > 0, "scenario.max_power_w: must be positive");
    check(s.coherence_symbols >= 1, "scenario.coherence_symbols: must be at least 1");
    check(s.pilot_symbols >= 1, "scenario.pilot_symbols: must be at least 1");
    check(s.pilot_symbols <= s.coherence_symbols,
          "scenario.pilot_symbols: must not exceed scenario.coherence_symbols");
    check(s.height_diff_m >= 0, "scenario.height_diff_m: must be non-negative");
    check(s.shadow_std_db >= 0, "scenario.shadow_std_db: must be non-negative");
    check(s.antenna_spacing_wl > 0, "scenario.antenna_spacing_wl: must be positive");
    check(s.angular_spread_deg >= 0, "scenario.angular_spread_deg: must be non-negative");
    check(s.noise_figure_db >= 0, "scenario.noise_figure_db: must be non-negative");
    check(s.rician_kappa >= 0, "scenario.rician_kappa: must be non-negative");
    check(s.cluster_size <= s.num_aps, "scenario.cluster_size: must not exceed scenario.num_aps");
    check(s.power_exponent >= 0 && s.power_exponent <= 2,
          "scenario.power_exponent: must be in [0, 2]");
    check(s.hold_phase_blocks >= 1, "scenario.hold_phase_blocks: must be at least 1");
}

void validate_plan(const ExperimentPlan &p)
{
    validate_scenario(p.scenario);

    check(!p.delta_deg.empty(), "experiment.delta_deg: must list at least one value");
    for (double d : p.delta_deg)
        check(d >= 0 && d <= 180, "experiment.delta_deg: values must be in [0, 180]");
    for (size_t i = 0; i < p.delta_deg.size(); i++)
        for (size_t j = i + 1; j < p.delta_deg.size(); j++)
            check(p.delta_deg[i] != p.delta_deg[j], "experiment.delta_deg: duplicate value");
    for (double k : p.kappa)
        check(k >= 0, "experiment.kappa: values must be non-negative");
    for (size_t i = 0; i < p.kappa.size(); i++)
        for (size_t j = i + 1; j < p.kappa.size(); j++)
            check(p.kappa[i] != p.kappa[j], "experiment.kappa: duplicate value");
    check(!p.modes.empty(), "experiment.modes: must list at least one mode");
    for (size_t i = 0; i < p.modes.size(); i++)
        for (size_t j = i + 1; j < p.modes.size(); j++)
            check(!(p.modes[i] == p.modes[j]), "experiment.modes: duplicate mode");
    check(p.num_drops >= 1, "experiment.drops: must be at least 1");
    check(p.trials_per_drop >= 2, "experiment.trials: must be at least 2");
    check(p.inner_samples >= 1, "experiment.inner_samples: must be at least 1");
}

std::vector<double> effective_kappa_grid(const ExperimentPlan &p)
{
    if (!p.kappa.empty())
        return p.kappa;
    return {p.scenario.rician_kappa};
}

// ---- canonical echo -------------------------------------------------------

static std::string join_doubles(const std::vector<double> &v)
{
    std::string out;
    for (size_t i = 0; i < v.size(); i++)
    {
        if (i)
            out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

std::string format_plan(const ExperimentPlan &p)
{
    const ScenarioConfig &s = p.scenario;
    std::string o;
    o += "[scenario]\n";
    o += "area_side_m = " + format_double(s.area_side_m) + "\n";
    o += "num_aps = " + std::to_string(s.num_aps) + "\n";
    o += "num_users = " + std::to_string(s.num_users) + "\n";
    o += "antennas_per_ap = " + std::to_string(s.antennas_per_ap) + "\n";
    o += "bandwidth_hz = " + format_double(s.bandwidth_hz) + "\n";
    o += "carrier_freq_ghz = " + format_double(s.carrier_freq_ghz) + "\n";
    o += "max_power_w = " + format_double(s.max_power_w) + "\n";
    o += "coherence_symbols = " + std::to_string(s.coherence_symbols) + "\n";
    o += "pilot_symbols = " + std::to_string(s.pilot_symbols) + "\n";
    o += "height_diff_m = " + format_double(s.height_diff_m) + "\n";
    o += "shadow_std_db = " + format_double(s.shadow_std_db) + "\n";
    o += "antenna_spacing_wl = " + format_double(s.antenna_spacing_wl) + "\n";
    o += "angular_spread_deg = " + format_double(s.angular_spread_deg) + "\n";
    o += "noise_figure_db = " + format_double(s.noise_figure_db) + "\n";
    o += "rician_kappa = " + format_double(s.rician_kappa) + "\n";
    o += "cluster_size = " + (s.cluster_size == 0 ? std::string("all") : std::to_string(s.cluster_size)) + "\n";
    o += "pilot_assignment = " + to_string(s.pilot_scheme) + "\n";
    o += "power_control = " + to_string(s.power_control) + "\n";
    o += "power_exponent = " + format_double(s.power_exponent) + "\n";
    o += "hold_phase_blocks = " + std::to_string(s.hold_phase_blocks) + "\n";
    o += "seed = " + std::to_string(s.seed) + "\n";
    o += "\n[experiment]\n";
    o += "delta_deg = " + join_doubles(p.delta_deg) + "\n";
    o += "kappa = " + join_doubles(p.kappa) + "\n";
    std::string modes;
    for (size_t i = 0; i < p.modes.size(); i++)
    {
        if (i)
            modes += ", ";
        modes += mode_name(p.modes[i]);
    }
    o += "modes = " + modes + "\n";
    o += "drops = " + std::to_string(p.num_drops) + "\n";
    o += "trials = " + std::to_string(p.trials_per_drop) + "\n";
    o += "inner_samples = " + std::to_string(p.inner_samples) + "\n";
    o += "pi_estimate = " + to_string(p.pi_granularity) + "\n";
    o += "overhead_prelog = " + std::string(p.overhead_prelog ? "true" : "false") + "\n";
    o += "threads = " + std::to_string(p.threads) + "\n";
    o += "\n[debug]\n";
    o += "dump_estimates = " + p.dump_estimates + "\n";
    o += "diagnostics_log = " + p.diagnostics_log + "\n";
    return o;
}

std::uint64_t plan_hash(const ExperimentPlan &p)
{
    std::string text = format_plan(p);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace cfsim
