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

#include "cfsim/verify.hpp"
#include "cfsim/beamforming.hpp"
#include "cfsim/channel.hpp"
#include "cfsim/estimation.hpp"
#include "cfsim/rng.hpp"
#include "cfsim/scenario.hpp"

#include <chrono>
#include <cmath>
#include <functional>

namespace cfsim
{

static ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.area_side_m = 500.0;
    c.num_aps = 5;
    c.num_users = 4;
    c.antennas_per_ap = 2;
    c.pilot_symbols = 2;
    c.rician_kappa = 5.0;
    c.seed = 77;
    return c;
}

static double rel_diff(const arma::cx_mat &a, const arma::cx_mat &b)
{
    double scale = std::max(arma::norm(a, "fro"), arma::norm(b, "fro"));
    if (scale == 0.0)
        return 0.0;
    return arma::norm(a - b, "fro") / scale;
}

static double rel_diff(const arma::cx_cube &a, const arma::cx_cube &b)
{
    double num = 0.0, den = 0.0;
    for (arma::uword l = 0; l < a.n_slices; l++)
    {
        num += arma::accu(arma::square(arma::abs(a.slice(l) - b.slice(l))));
        den += arma::accu(arma::square(arma::abs(a.slice(l))));
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

// ---- individual checks ----------------------------------------------------

static CheckResult check_penalty_factor()
{
    CheckResult r{"penalty-factor", true, 0, ""};
    if (penalty_factor(0.0) != 1.0)
    {
        r.passed = false;
        r.detail = "value at zero is not exactly 1";
        return r;
    }
    if (std::abs(penalty_factor(pi)) > 1.0e-15)
    {
        r.passed = false;
        r.detail = "value at pi is not numerically zero";
        return r;
    }

    Rng rng(123456);
    double worst = 0.0;
    for (int g = 1; g <= 8; g++)
    {
        double delta = pi * double(g) / 8.0;
        double acc = 0.0;
        const int S = 200000;
        for (int s = 0; s < S; s++)
            acc += std::cos(rng.symmetric(delta));
        double mc = acc / S;
        worst = std::max(worst, std::abs(mc - penalty_factor(delta)));
    }
    r.detail = "max abs deviation " + std::to_string(worst);
    r.passed = worst < 5.0e-3;
    return r;
}

static CheckResult check_estimator_limits()
{
    CheckResult r{"estimator-limits", true, 0, ""};
    ScenarioStatistics stats = generate_drop(small_config(), 2024);
    ChannelFactors factors = channel_factors(stats);

    double worst = 0.0;
    for (int side = 0; side < 2; side++)
    {
        double delta = side == 0 ? 0.0 : pi;
        EstimationCache general = build_estimation_cache(stats, Estimator::lmmse, delta);
        EstimationCache limit = build_estimation_cache(
            stats, side == 0 ? Estimator::perfect_phase : Estimator::phase_blind, 0.0);

        Rng ph = make_stream(9, 0, 0, Stream::phase);
        Rng er = make_stream(9, 0, 0, Stream::phase_error);
        Rng nl = make_stream(9, 0, 0, Stream::nlos);
        Rng pn = make_stream(9, 0, 0, Stream::pilot_noise);
        PhaseBook pb = sample_phases(stats.K, stats.L, delta, ph, er);
        arma::cx_cube h = sample_channels(stats, factors, pb.theta, nl);
        arma::cx_cube y = pilot_observation(stats, h, pn);

        worst = std::max(worst, rel_diff(estimate_channels(stats, general, y, pb),
                                         estimate_channels(stats, limit, y, pb)));
    }
    r.detail = "max relative difference " + std::to_string(worst);
    r.passed = worst < 1.0e-10;
    return r;
}

static CheckResult check_error_covariance(bool inject_sign_error)
{
    CheckResult r{"error-covariance", true, 0, ""};
    ScenarioConfig cfg = small_config();
    cfg.num_aps = 2;
    cfg.num_users = 3;
    ScenarioStatistics stats = generate_drop(cfg, 501);
    ChannelFactors factors = channel_factors(stats);

    const double delta = 0.8;
    EstimationCache cache = build_estimation_cache(stats, Estimator::lmmse, delta);
    double rho = penalty_factor(delta);

    // independent reference: prior covariances assembled from scratch and
    // inverted directly (optionally with a deliberately wrong sign on the
    // leftover LoS power, which the Monte Carlo comparison must expose)
    double los_sign = inject_sign_error ? -1.0 : 1.0;
    arma::field<arma::cx_mat> ref(stats.K, stats.L);
    for (std::uint64_t l = 0; l < stats.L; l++)
    {
        for (std::uint64_t t = 0; t < stats.tau_p; t++)
        {
            const arma::uvec &grp = stats.pilot_group[t];
            arma::cx_mat M(stats.N, stats.N, arma::fill::eye);
            M *= stats.noise_w;
            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword i = grp(j);
                arma::cx_vec los = stats.los.slice(l).col(i);
                arma::cx_mat sig = stats.scatter_cov(i, l) +
                                   los_sign * (1.0 - rho * rho) * (los * los.t());
                M += stats.pilot_power_w(i) * double(stats.tau_p) * sig;
            }
            arma::cx_mat psi = arma::inv(M);
            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword k = grp(j);
                arma::cx_vec los = stats.los.slice(l).col(k);
                arma::cx_mat sig = stats.scatter_cov(k, l) +
                                   los_sign * (1.0 - rho * rho) * (los * los.t());
                ref(k, l) = sig - stats.pilot_power_w(k) * double(stats.tau_p) * sig * psi * sig;
            }
        }
    }

    // fixed phase estimates, Monte Carlo over everything they do not pin down
    Rng ph = make_stream(502, 0, 0, Stream::phase);
    Rng er = make_stream(502, 0, 0, Stream::phase_error);
    PhaseBook pb = sample_phases(stats.K, stats.L, delta, ph, er);

    Rng mc = make_stream(502, 0, 0, Stream::virtual_mc);
    const int S = 20000;
    arma::field<arma::cx_mat> emp(stats.K, stats.L);
    for (std::uint64_t l = 0; l < stats.L; l++)
        for (std::uint64_t k = 0; k < stats.K; k++)
            emp(k, l).zeros(stats.N, stats.N);

    PhaseBook inner = pb;
    for (int s = 0; s < S; s++)
    {
        inner.theta = pb.theta_hat;
        for (std::uint64_t l = 0; l < stats.L; l++)
            for (std::uint64_t k = 0; k < stats.K; k++)
                inner.theta(k, l) += mc.symmetric(delta);
        arma::cx_cube h = sample_channels(stats, factors, inner.theta, mc);
        arma::cx_cube y = pilot_observation(stats, h, mc);
        arma::cx_cube est = estimate_channels(stats, cache, y, inner);
        for (std::uint64_t l = 0; l < stats.L; l++)
            for (std::uint64_t k = 0; k < stats.K; k++)
            {
                arma::cx_vec e = h.slice(l).col(k) - est.slice(l).col(k);
                emp(k, l) += e * e.t();
            }
    }

    double worst = 0.0;
    for (std::uint64_t l = 0; l < stats.L; l++)
        for (std::uint64_t k = 0; k < stats.K; k++)
        {
            emp(k, l) /= double(S);
            worst = std::max(worst, rel_diff(emp(k, l), ref(k, l)));
        }
    r.detail = "max relative Frobenius deviation " + std::to_string(worst);
    r.passed = worst < 0.08;
    return r;
}

static CheckResult check_team_solver()
{
    CheckResult r{"team-solver", true, 0, ""};
    const std::uint64_t L = 4, K = 5;
    Rng rng(31415);

    arma::field<arma::cx_mat> pi_f(L);
    for (std::uint64_t l = 0; l < L; l++)
    {
        arma::cx_mat B(K, K);
        for (auto &v : B)
            v = rng.cnormal();
        arma::cx_mat P = B * B.t();
        arma::vec ev;
        arma::cx_mat dummy;
        arma::eig_sym(ev, dummy, P);
        pi_f(l) = P * (0.85 / ev.max()); // contraction with spectrum in [0, 0.85]
    }

    std::vector<arma::uvec> serving(K);
    serving[0] = arma::uvec{0};          // singleton cluster
    serving[1] = arma::uvec{0, 1};
    serving[2] = arma::uvec{1, 2, 3};
    serving[3] = arma::uvec{0, 1, 2, 3}; // full cluster
    serving[4] = arma::uvec{0, 1, 2, 3};

    TeamDiagnostics diag;
    arma::field<arma::cx_mat> coeff = team_coefficients(serving, pi_f, &diag);

    arma::cx_mat eye_k(K, K, arma::fill::eye);
    if (arma::abs(coeff(0).col(0) - eye_k.col(0)).max() != 0.0)
    {
        r.passed = false;
        r.detail = "singleton cluster coefficient is not exactly the unit vector";
        return r;
    }

    // brute force: assemble the full block system per user and solve densely
    double worst = 0.0;
    for (std::uint64_t k = 1; k < K; k++)
    {
        const arma::uvec &aps = serving[k];
        const std::uint64_t n = aps.n_elem;
        arma::cx_mat M(n * K, n * K, arma::fill::zeros);
        arma::cx_vec rhs(n * K, arma::fill::zeros);
        for (std::uint64_t a = 0; a < n; a++)
        {
            rhs(a * K + k) = 1.0;
            for (std::uint64_t b = 0; b < n; b++)
            {
                arma::cx_mat blk = (a == b) ? arma::eye<arma::cx_mat>(K, K)
                                            : arma::cx_mat(pi_f(aps(b)));
                M.submat(a * K, b * K, a * K + K - 1, b * K + K - 1) = blk;
            }
        }
        arma::cx_vec sol = arma::solve(M, rhs);
        for (std::uint64_t a = 0; a < n; a++)
        {
            arma::cx_vec dense = sol.subvec(a * K, a * K + K - 1);
            worst = std::max(worst,
                             arma::abs(dense - coeff(aps(a)).col(k)).max());
        }
    }
    r.detail = "max deviation from dense solve " + std::to_string(worst) +
               ", residual " + std::to_string(diag.max_residual);
    r.passed = worst < 1.0e-10 && diag.max_residual < 1.0e-10;
    return r;
}

static CheckResult check_single_ap_equivalence()
{
    CheckResult r{"single-ap-equivalence", true, 0, ""};
    ScenarioConfig cfg = small_config();
    cfg.num_aps = 1;
    cfg.num_users = 3;
    cfg.antennas_per_ap = 4;
    ScenarioStatistics stats = generate_drop(cfg, 88);
    ChannelFactors factors = channel_factors(stats);
    EstimationCache cache = build_estimation_cache(stats, Estimator::lmmse, 0.5);

    Rng ph = make_stream(88, 0, 1, Stream::phase);
    Rng er = make_stream(88, 0, 1, Stream::phase_error);
    Rng nl = make_stream(88, 0, 1, Stream::nlos);
    Rng pn = make_stream(88, 0, 1, Stream::pilot_noise);
    PhaseBook pb = sample_phases(stats.K, stats.L, 0.5, ph, er);
    arma::cx_cube h = sample_channels(stats, factors, pb.theta, nl);
    arma::cx_cube y = pilot_observation(stats, h, pn);
    arma::cx_cube est = estimate_channels(stats, cache, y, pb);

    arma::cx_mat cent = centralized_combiners(stats, cache, est);

    arma::cx_cube local = local_stages(stats, cache, est);
    Rng ir = make_stream(88, 0, 1, Stream::team_inner);
    arma::field<arma::cx_mat> pi_f =
        team_statistics(stats, cache, factors, pb, 3, ir, false);
    arma::field<arma::cx_mat> coeff = team_coefficients(stats.serving, pi_f, nullptr);
    arma::cx_mat dist = distributed_combiners(stats, local, coeff);

    double worst = rel_diff(cent, dist);
    r.detail = "relative difference " + std::to_string(worst);
    r.passed = worst < 1.0e-10;
    return r;
}

static CheckResult check_combiner_optimality()
{
    CheckResult r{"combiner-optimality", true, 0, ""};
    ScenarioStatistics stats = generate_drop(small_config(), 314);
    ChannelFactors factors = channel_factors(stats);
    EstimationCache cache = build_estimation_cache(stats, Estimator::lmmse, 0.7);

    Rng ph = make_stream(314, 0, 2, Stream::phase);
    Rng er = make_stream(314, 0, 2, Stream::phase_error);
    Rng nl = make_stream(314, 0, 2, Stream::nlos);
    Rng pn = make_stream(314, 0, 2, Stream::pilot_noise);
    PhaseBook pb = sample_phases(stats.K, stats.L, 0.7, ph, er);
    arma::cx_cube h = sample_channels(stats, factors, pb.theta, nl);
    arma::cx_cube y = pilot_observation(stats, h, pn);
    arma::cx_cube est = estimate_channels(stats, cache, y, pb);
    arma::cx_mat V = centralized_combiners(stats, cache, est);

    const std::uint64_t K = stats.K, LN = stats.L * stats.N;

    // virtual observations: estimate carries the signal, estimation error
    // plus thermal noise enter as shaped noise
    arma::cx_mat Hp = stack_aps(est);
    for (std::uint64_t k = 0; k < K; k++)
        Hp.col(k) *= std::sqrt(stats.data_power_w(k));

    arma::cx_mat noise_cov(LN, LN, arma::fill::zeros);
    for (std::uint64_t l = 0; l < stats.L; l++)
        noise_cov.submat(l * stats.N, l * stats.N, (l + 1) * stats.N - 1, (l + 1) * stats.N - 1) =
            cache.noise_shaping.slice(l);
    noise_cov.diag() += stats.noise_w;

    arma::vec ev;
    arma::cx_mat evec;
    if (!arma::eig_sym(ev, evec, noise_cov))
    {
        r.passed = false;
        r.detail = "noise covariance factorization failed";
        return r;
    }
    ev.transform([](double v) { return v > 0 ? std::sqrt(v) : 0.0; });
    arma::cx_mat noise_sqrt = evec * arma::diagmat(ev) * evec.t();

    // raw draws, then exact moment matching: empirical mean forced to zero
    // and empirical covariance to identity, so the sampled quadratic MSE
    // agrees with the population one for EVERY combiner
    const std::uint64_t dim = K + LN;
    const std::uint64_t S = 4 * dim + 64;
    Rng mc = make_stream(314, 0, 2, Stream::virtual_mc);
    arma::cx_mat W(dim, S);
    for (auto &v : W)
        v = mc.cnormal();
    W.each_col() -= arma::cx_vec(arma::mean(W, 1));
    arma::cx_mat G = (W * W.t()) / double(S);
    arma::cx_mat Gl;
    if (!arma::chol(Gl, G, "lower"))
    {
        r.passed = false;
        r.detail = "sample Gram not positive definite";
        return r;
    }
    W = arma::solve(arma::trimatl(Gl), W);

    arma::cx_mat symbols = W.rows(0, K - 1);
    arma::cx_mat obs = Hp * symbols + noise_sqrt * W.rows(K, dim - 1);

    auto mse_of = [&](const arma::cx_vec &u, std::uint64_t k) {
        arma::cx_rowvec err = symbols.row(k) - u.t() * obs;
        return arma::accu(arma::square(arma::abs(err))) / double(S);
    };

    Rng pert = make_stream(314, 0, 3, Stream::virtual_mc);
    double worst_gap = 0.0;
    for (std::uint64_t k = 0; k < K; k++)
    {
        arma::cx_vec v = V.col(k);
        double base = mse_of(v, k);
        double vnorm = arma::norm(v);
        for (int trial = 0; trial < 20; trial++)
        {
            arma::cx_vec d(LN);
            for (auto &x : d)
                x = pert.cnormal();
            d *= (1.0e-3 * vnorm) / arma::norm(d);
            double perturbed = mse_of(v + d, k);
            worst_gap = std::min(worst_gap, perturbed - base);
        }
    }
    r.detail = "worst (perturbed - optimal) MSE gap " + std::to_string(worst_gap);
    r.passed = worst_gap >= -1.0e-16;
    return r;
}

static CheckResult check_determinism()
{
    CheckResult r{"thread-determinism", true, 0, ""};
    ExperimentPlan plan;
    plan.scenario = small_config();
    plan.scenario.num_aps = 4;
    plan.scenario.num_users = 3;
    plan.trials_per_drop = 6;
    plan.inner_samples = 4;
    plan.delta_deg = {45.0};
    plan.modes = {{Arch::distributed, Estimator::lmmse}};

    plan.threads = 1;
    CellResult a = run_cell(plan, {plan.modes[0], 45.0, plan.scenario.rician_kappa});
    plan.threads = 3;
    CellResult b = run_cell(plan, {plan.modes[0], 45.0, plan.scenario.rician_kappa});

    bool same = true;
    for (std::uint64_t d = 0; d < a.drops.size(); d++)
    {
        const RateReport &ra = a.drops[d].report, &rb = b.drops[d].report;
        same = same && arma::all(ra.se_uatf == rb.se_uatf) &&
               arma::all(ra.se_oer == rb.se_oer) &&
               arma::all(ra.se_uatf_err == rb.se_uatf_err) &&
               arma::all(ra.se_oer_err == rb.se_oer_err);
    }
    r.detail = same ? "1 and 3 worker threads agree bit for bit" : "thread count changed results";
    r.passed = same;
    return r;
}

std::vector<CheckResult> run_verification(const LogFn &log, const VerifyOptions &opts)
{
    std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
        {"penalty-factor", [] { return check_penalty_factor(); }},
        {"estimator-limits", [] { return check_estimator_limits(); }},
        {"error-covariance", [&] { return check_error_covariance(opts.inject_sign_error); }},
        {"team-solver", [] { return check_team_solver(); }},
        {"single-ap-equivalence", [] { return check_single_ap_equivalence(); }},
        {"combiner-optimality", [] { return check_combiner_optimality(); }},
        {"thread-determinism", [] { return check_determinism(); }},
    };

    std::vector<CheckResult> results;
    for (auto &[name, fn] : checks)
    {
        auto t0 = std::chrono::steady_clock::now();
        CheckResult res;
        try
        {
            res = fn();
        }
        catch (const std::exception &e)
        {
            res.name = name;
            res.passed = false;
            res.detail = std::string("exception: ") + e.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        res.seconds = std::chrono::duration<double>(t1 - t0).count();
        if (log)
        {
            char line[256];
            std::snprintf(line, sizeof(line), "[%s] %-22s %7.2f s  %s",
                          res.passed ? "pass" : "FAIL", res.name.c_str(), res.seconds,
                          res.detail.c_str());
            log(line);
        }
        results.push_back(res);
    }
    return results;
}

} // namespace cfsim
