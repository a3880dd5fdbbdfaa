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

#include "cfsim/harness.hpp"
#include "cfsim/beamforming.hpp"
#include "cfsim/channel.hpp"
#include "cfsim/estimation.hpp"
#include "cfsim/rng.hpp"
#include "cfsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

// keep BLAS single threaded: internal threading would make floating-point
// reduction order depend on the machine state, and the worker threads
// already saturate the cores
extern "C" void openblas_set_num_threads(int);

namespace cfsim
{

static void pin_blas_threads()
{
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

static std::string cell_tag(const CellSpec &spec)
{
    return to_string(spec.mode.arch) + "-" + to_string(spec.mode.estimator) + "_k" +
           format_double(spec.kappa) + "_d" + format_double(spec.delta_deg);
}

// ---- cell reductions -------------------------------------------------------

arma::vec CellResult::pooled_uatf() const
{
    arma::vec out;
    for (const auto &d : drops)
        out = arma::join_cols(out, d.report.se_uatf);
    return out;
}

arma::vec CellResult::pooled_oer() const
{
    arma::vec out;
    for (const auto &d : drops)
        out = arma::join_cols(out, d.report.se_oer);
    return out;
}

double CellResult::mean_uatf() const { return arma::mean(pooled_uatf()); }
double CellResult::mean_oer() const { return arma::mean(pooled_oer()); }

static double combine_errs(const std::vector<DropResult> &drops, bool oer)
{
    // per-user standard errors combined as if independent
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const auto &d : drops)
    {
        const arma::vec &e = oer ? d.report.se_oer_err : d.report.se_uatf_err;
        sum += arma::accu(arma::square(e));
        n += e.n_elem;
    }
    return n > 0 ? std::sqrt(sum) / double(n) : 0.0;
}

double CellResult::stderr_uatf() const { return combine_errs(drops, false); }
double CellResult::stderr_oer() const { return combine_errs(drops, true); }

// ---- estimate dump ---------------------------------------------------------

static void dump_u64(std::ofstream &f, std::uint64_t v)
{
    f.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

static void write_estimate_dump(const std::string &path, const ScenarioStatistics &stats,
                                const EstimationCache &cache,
                                const std::vector<arma::cx_cube> &est_slots)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw numeric_error("cannot open estimate dump file '" + path + "'");

    f.write("CFESTDMP", 8);
    dump_u64(f, 1); // format version
    dump_u64(f, stats.L);
    dump_u64(f, stats.K);
    dump_u64(f, stats.N);
    dump_u64(f, est_slots.size());

    // per-drop error covariances once, AP-major then user order
    for (std::uint64_t l = 0; l < stats.L; l++)
        for (std::uint64_t k = 0; k < stats.K; k++)
        {
            const arma::cx_mat &C = cache.err_cov(k, l);
            f.write(reinterpret_cast<const char *>(C.memptr()),
                    std::streamsize(C.n_elem * sizeof(std::complex<double>)));
        }

    for (std::uint64_t t = 0; t < est_slots.size(); t++)
    {
        dump_u64(f, t);
        const arma::cx_cube &e = est_slots[t];
        f.write(reinterpret_cast<const char *>(e.memptr()),
                std::streamsize(e.n_elem * sizeof(std::complex<double>)));
    }
    if (!f)
        throw numeric_error("write failed for estimate dump file '" + path + "'");
}

// ---- cell evaluation -------------------------------------------------------

namespace
{
struct DropContext
{
    const ExperimentPlan *plan = nullptr;
    const CellSpec *spec = nullptr;
    ScenarioStatistics stats;
    ChannelFactors factors;
    EstimationCache cache;
    double delta_rad = 0.0;
    std::uint64_t drop = 0;
    std::uint64_t master = 0;
    bool distributed = false;
    bool per_drop_pi = false;
    arma::field<arma::cx_mat> drop_coeff;
};
} // namespace

static constexpr std::uint64_t drop_level_trial = ~std::uint64_t(0);

static void run_one_trial(const DropContext &ctx, std::uint64_t t, RateAccumulator &acc,
                          std::vector<arma::cx_cube> *est_slots, TeamDiagnostics &team_diag)
{
    const ExperimentPlan &plan = *ctx.plan;
    const ScenarioStatistics &stats = ctx.stats;
    const std::uint64_t hold = plan.scenario.hold_phase_blocks;

    Rng phase_rng = make_stream(ctx.master, ctx.drop, t / hold, Stream::phase);
    Rng err_rng = make_stream(ctx.master, ctx.drop, t, Stream::phase_error);
    Rng nlos_rng = make_stream(ctx.master, ctx.drop, t, Stream::nlos);
    Rng noise_rng = make_stream(ctx.master, ctx.drop, t, Stream::pilot_noise);

    PhaseBook pb = sample_phases(stats.K, stats.L, ctx.delta_rad, phase_rng, err_rng);
    arma::cx_cube channels = sample_channels(stats, ctx.factors, pb.theta, nlos_rng);
    arma::cx_cube pilots = pilot_observation(stats, channels, noise_rng);
    arma::cx_cube est = estimate_channels(stats, ctx.cache, pilots, pb);

    arma::cx_mat combiners;
    if (!ctx.distributed)
    {
        combiners = centralized_combiners(stats, ctx.cache, est);
    }
    else
    {
        arma::cx_cube local = local_stages(stats, ctx.cache, est);
        if (ctx.per_drop_pi)
        {
            combiners = distributed_combiners(stats, local, ctx.drop_coeff);
        }
        else
        {
            Rng inner_rng = make_stream(ctx.master, ctx.drop, t, Stream::team_inner);
            arma::field<arma::cx_mat> pi = team_statistics(
                stats, ctx.cache, ctx.factors, pb, plan.inner_samples, inner_rng, false);
            TeamDiagnostics td;
            arma::field<arma::cx_mat> coeff = team_coefficients(stats.serving, pi, &td);
            team_diag.max_residual = std::max(team_diag.max_residual, td.max_residual);
            team_diag.min_rcond = std::min(team_diag.min_rcond, td.min_rcond);
            combiners = distributed_combiners(stats, local, coeff);
        }
    }

    arma::cx_mat gains = effective_gains(stack_aps(channels), combiners, stats.data_power_w);
    acc.set_trial(t, trial_rates(gains, combiners, stats.noise_w));

    if (est_slots)
        (*est_slots)[t] = est;
}

CellResult run_cell(const ExperimentPlan &plan, const CellSpec &spec, const LogFn &log)
{
    pin_blas_threads();
    validate_plan(plan);

    CellResult result;
    result.spec = spec;

    const std::uint64_t T = plan.trials_per_drop;
    std::uint64_t workers = plan.threads ? plan.threads : std::thread::hardware_concurrency();
    workers = std::max<std::uint64_t>(1, std::min(workers, T));

    ScenarioConfig sc = plan.scenario;
    sc.rician_kappa = spec.kappa;

    for (std::uint64_t d = 0; d < plan.num_drops; d++)
    {
        auto t0 = std::chrono::steady_clock::now();

        DropContext ctx;
        ctx.plan = &plan;
        ctx.spec = &spec;
        ctx.master = plan.scenario.seed;
        ctx.drop = d;
        ctx.delta_rad = spec.delta_deg * pi / 180.0;
        ctx.distributed = (spec.mode.arch == Arch::distributed);
        ctx.per_drop_pi = (plan.pi_granularity == PiGranularity::per_drop);

        ctx.stats = generate_drop(sc, mix_seed(ctx.master, d, 0, 0));
        ctx.factors = channel_factors(ctx.stats);
        ctx.cache = build_estimation_cache(ctx.stats, spec.mode.estimator, ctx.delta_rad);

        DropResult dres;
        if (ctx.distributed && ctx.per_drop_pi)
        {
            Rng inner_rng = make_stream(ctx.master, d, drop_level_trial, Stream::team_inner);
            PhaseBook unused;
            unused.theta.zeros(ctx.stats.K, ctx.stats.L);
            unused.theta_hat.zeros(ctx.stats.K, ctx.stats.L);
            unused.delta = ctx.delta_rad;
            arma::field<arma::cx_mat> pi = team_statistics(
                ctx.stats, ctx.cache, ctx.factors, unused, plan.inner_samples, inner_rng, true);
            TeamDiagnostics td;
            ctx.drop_coeff = team_coefficients(ctx.stats.serving, pi, &td);
            dres.max_team_residual = td.max_residual;
            dres.min_team_rcond = td.min_rcond;
        }

        RateAccumulator acc(ctx.stats.K, T);
        std::vector<arma::cx_cube> est_slots;
        if (!plan.dump_estimates.empty())
            est_slots.resize(T);

        std::atomic<std::uint64_t> next{0};
        std::atomic<bool> failed{false};
        std::mutex merge_mtx;
        std::string first_error;
        TeamDiagnostics merged_diag;

        auto work = [&]() {
            TeamDiagnostics local_diag;
            for (;;)
            {
                std::uint64_t t = next.fetch_add(1);
                if (t >= T || failed.load(std::memory_order_relaxed))
                    break;
                try
                {
                    run_one_trial(ctx, t, acc, est_slots.empty() ? nullptr : &est_slots,
                                  local_diag);
                }
                catch (const std::exception &e)
                {
                    std::lock_guard<std::mutex> lk(merge_mtx);
                    if (first_error.empty())
                        first_error = "trial " + std::to_string(t) + ": " + e.what();
                    failed.store(true);
                    break;
                }
            }
            std::lock_guard<std::mutex> lk(merge_mtx);
            merged_diag.max_residual = std::max(merged_diag.max_residual, local_diag.max_residual);
            merged_diag.min_rcond = std::min(merged_diag.min_rcond, local_diag.min_rcond);
        };

        if (workers == 1)
        {
            work();
        }
        else
        {
            std::vector<std::thread> pool;
            for (std::uint64_t w = 0; w < workers; w++)
                pool.emplace_back(work);
            for (auto &th : pool)
                th.join();
        }

        if (!first_error.empty())
            throw numeric_error("cell " + cell_tag(spec) + ", drop " + std::to_string(d) + ", " +
                                first_error);

        double prelog = 1.0;
        if (plan.overhead_prelog)
            prelog = 1.0 - double(plan.scenario.pilot_symbols) / double(plan.scenario.coherence_symbols);

        dres.report = acc.finalize(prelog);
        dres.distance_clamped = ctx.stats.distance_clamped;
        dres.est_ill_conditioned = ctx.cache.ill_conditioned;
        dres.max_team_residual = std::max(dres.max_team_residual, merged_diag.max_residual);
        dres.min_team_rcond = std::min(dres.min_team_rcond, merged_diag.min_rcond);

        if (!plan.dump_estimates.empty())
            write_estimate_dump(plan.dump_estimates + "." + cell_tag(spec) + ".drop" +
                                    std::to_string(d) + ".bin",
                                ctx.stats, ctx.cache, est_slots);

        auto t1 = std::chrono::steady_clock::now();
        dres.seconds = std::chrono::duration<double>(t1 - t0).count();
        if (log)
            log("  drop " + std::to_string(d) + ": " + std::to_string(dres.seconds) + " s, " +
                std::to_string(T) + " trials");

        result.drops.push_back(std::move(dres));
    }
    return result;
}

// ---- sweep -----------------------------------------------------------------

SweepResult run_sweep(const ExperimentPlan &plan, const LogFn &log)
{
    pin_blas_threads();
    validate_plan(plan);

    SweepResult out;
    out.config_echo = format_plan(plan);
    out.config_hash = plan_hash(plan);
    out.version = version_string();

    std::ofstream diag;
    if (!plan.diagnostics_log.empty())
    {
        diag.open(plan.diagnostics_log, std::ios::trunc);
        if (!diag)
            throw validation_error("cannot open diagnostics log '" + plan.diagnostics_log + "'");
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(out.config_hash));
        diag << "config_hash " << hash << "\n";
    }

    for (const Mode &mode : plan.modes)
    {
        for (double kappa : effective_kappa_grid(plan))
        {
            for (double delta : plan.delta_deg)
            {
                CellSpec spec{mode, delta, kappa};
                if (log)
                    log("cell " + cell_tag(spec));
                CellResult cell = run_cell(plan, spec, log);

                if (diag.is_open())
                {
                    for (std::uint64_t d = 0; d < cell.drops.size(); d++)
                    {
                        const DropResult &r = cell.drops[d];
                        diag << cell_tag(spec) << " drop=" << d
                             << " team_residual=" << r.max_team_residual
                             << " team_rcond=" << r.min_team_rcond
                             << " dist_clamped=" << r.distance_clamped
                             << " est_ill_cond=" << r.est_ill_conditioned
                             << " uatf_clamped=" << r.report.clamped
                             << " seconds=" << r.seconds << "\n";
                    }
                }
                out.cells.push_back(std::move(cell));
            }
        }
    }
    return out;
}

// ---- reductions and output -------------------------------------------------

arma::mat empirical_cdf(const arma::vec &samples)
{
    if (samples.n_elem == 0)
        throw validation_error("empirical_cdf: no samples");
    arma::vec s = arma::sort(samples);
    arma::mat out(s.n_elem, 2);
    for (arma::uword i = 0; i < s.n_elem; i++)
    {
        out(i, 0) = s(i);
        out(i, 1) = double(i + 1) / double(s.n_elem);
    }
    return out;
}

std::vector<SummaryRow> summarize(const SweepResult &result)
{
    std::vector<SummaryRow> rows;
    for (const CellResult &c : result.cells)
    {
        SummaryRow r;
        r.mode = c.spec.mode;
        r.kappa = c.spec.kappa;
        r.delta_deg = c.spec.delta_deg;
        r.mean_uatf = c.mean_uatf();
        r.stderr_uatf = c.stderr_uatf();
        r.mean_oer = c.mean_oer();
        r.stderr_oer = c.stderr_oer();
        r.drops = c.drops.size();
        r.trials = c.drops.empty() ? 0 : c.drops[0].report.trials;
        rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(), [](const SummaryRow &a, const SummaryRow &b) {
        if (a.mode.arch != b.mode.arch)
            return int(a.mode.arch) < int(b.mode.arch);
        if (a.mode.estimator != b.mode.estimator)
            return int(a.mode.estimator) < int(b.mode.estimator);
        if (a.kappa != b.kappa)
            return a.kappa < b.kappa;
        return a.delta_deg < b.delta_deg;
    });
    return rows;
}

static std::string csv_num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_outputs(const SweepResult &result, const ExperimentPlan &plan,
                   const std::string &out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto path = [&](const std::string &name) { return (fs::path(out_dir) / name).string(); };

    {
        std::ofstream f(path("summary.csv"), std::ios::trunc);
        if (!f)
            throw validation_error("cannot write to output directory '" + out_dir + "'");
        f << "arch,estimator,kappa,delta_deg,drops,trials,mean_se_uatf,stderr_se_uatf,"
             "mean_se_oer,stderr_se_oer\n";
        for (const SummaryRow &r : summarize(result))
        {
            f << to_string(r.mode.arch) << ',' << to_string(r.mode.estimator) << ','
              << csv_num(r.kappa) << ',' << csv_num(r.delta_deg) << ',' << r.drops << ','
              << r.trials << ',' << csv_num(r.mean_uatf) << ',' << csv_num(r.stderr_uatf) << ','
              << csv_num(r.mean_oer) << ',' << csv_num(r.stderr_oer) << '\n';
        }
    }

    for (const CellResult &c : result.cells)
    {
        std::string tag = cell_tag(c.spec);
        {
            std::ofstream f(path("rates_" + tag + ".csv"), std::ios::trunc);
            f << "drop,user,se_uatf,se_uatf_stderr,se_oer,se_oer_stderr\n";
            for (std::uint64_t d = 0; d < c.drops.size(); d++)
            {
                const RateReport &rep = c.drops[d].report;
                for (arma::uword k = 0; k < rep.se_uatf.n_elem; k++)
                    f << d << ',' << k << ',' << csv_num(rep.se_uatf(k)) << ','
                      << csv_num(rep.se_uatf_err(k)) << ',' << csv_num(rep.se_oer(k)) << ','
                      << csv_num(rep.se_oer_err(k)) << '\n';
            }
        }
        {
            std::ofstream f(path("cdf_" + tag + ".csv"), std::ios::trunc);
            f << "bound,se,cdf\n";
            arma::mat cu = empirical_cdf(c.pooled_uatf());
            for (arma::uword i = 0; i < cu.n_rows; i++)
                f << "uatf," << csv_num(cu(i, 0)) << ',' << csv_num(cu(i, 1)) << '\n';
            arma::mat co = empirical_cdf(c.pooled_oer());
            for (arma::uword i = 0; i < co.n_rows; i++)
                f << "oer," << csv_num(co(i, 0)) << ',' << csv_num(co(i, 1)) << '\n';
        }
    }

    std::ofstream f(path("manifest.txt"), std::ios::trunc);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(result.config_hash));
    f << "cfsim " << result.version << "\n";
    f << "config_hash " << hash << "\n";
    f << "note: CDF files pool per-user values over all drops of a cell\n";
    f << "note: cell standard errors combine per-user errors assuming independence\n\n";
    for (const CellResult &c : result.cells)
    {
        f << "[cell " << cell_tag(c.spec) << "]\n";
        for (std::uint64_t d = 0; d < c.drops.size(); d++)
        {
            const DropResult &r = c.drops[d];
            f << "drop " << d << ": trials=" << r.report.trials << " seconds=" << r.seconds
              << " team_residual=" << r.max_team_residual << " team_rcond=" << r.min_team_rcond
              << " dist_clamped=" << r.distance_clamped
              << " est_ill_cond=" << r.est_ill_conditioned
              << " denom_clamped=" << r.report.clamped << "\n";
        }
    }
    f << "\n[config]\n" << result.config_echo;

    if (!plan.dump_estimates.empty())
        f << "\nestimate dumps written next to '" << plan.dump_estimates << "'\n";
}

} // namespace cfsim
