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

#include "cfsim/beamforming.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace cfsim
{

arma::cx_mat centralized_combiners(const ScenarioStatistics &stats, const EstimationCache &cache,
                                   const arma::cx_cube &est)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;

    arma::cx_mat stacked = stack_aps(est); // (L*N) x K
    arma::cx_mat weighted = stacked;       // columns scaled by sqrt(data power)
    for (std::uint64_t k = 0; k < K; k++)
        weighted.col(k) *= std::sqrt(stats.data_power_w(k));

    // users sharing a serving cluster share the factorization
    std::map<std::vector<arma::uword>, std::vector<arma::uword>> groups;
    for (std::uint64_t k = 0; k < K; k++)
    {
        std::vector<arma::uword> key(stats.serving[k].begin(), stats.serving[k].end());
        groups[key].push_back(k);
    }

    arma::cx_mat combiners(L * N, K, arma::fill::zeros);
    for (const auto &[aps, users] : groups)
    {
        arma::uvec rows(aps.size() * N);
        for (std::uint64_t j = 0; j < aps.size(); j++)
            for (std::uint64_t m = 0; m < N; m++)
                rows(j * N + m) = aps[j] * N + m;

        // Gram over ALL users: everyone interferes inside the cluster rows
        arma::cx_mat sub = weighted.rows(rows);
        arma::cx_mat A = sub * sub.t();
        for (std::uint64_t j = 0; j < aps.size(); j++)
            A.submat(j * N, j * N, j * N + N - 1, j * N + N - 1) +=
                cache.noise_shaping.slice(aps[j]);
        A.diag() += stats.noise_w;

        arma::uvec cols(users.size());
        for (std::uint64_t j = 0; j < users.size(); j++)
            cols(j) = users[j];

        arma::cx_mat rhs = sub.cols(cols);
        arma::cx_mat sol;
        if (!arma::solve(sol, A, rhs, arma::solve_opts::likely_sympd))
            throw numeric_error("centralized combiner solve failed for the cluster of user " +
                                std::to_string(users[0]));
        combiners.submat(rows, cols) = sol;
    }
    return combiners;
}

arma::cx_cube local_stages(const ScenarioStatistics &stats, const EstimationCache &cache,
                           const arma::cx_cube &est)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;
    arma::cx_cube stages(N, K, L);

    for (std::uint64_t l = 0; l < L; l++)
    {
        arma::cx_mat weighted = est.slice(l);
        for (std::uint64_t k = 0; k < K; k++)
            weighted.col(k) *= std::sqrt(stats.data_power_w(k));

        arma::cx_mat A = weighted * weighted.t() + cache.noise_shaping.slice(l);
        A.diag() += stats.noise_w;

        arma::cx_mat sol;
        if (!arma::solve(sol, A, weighted, arma::solve_opts::likely_sympd))
            throw numeric_error("local combining stage solve failed at AP " + std::to_string(l));
        stages.slice(l) = sol;
    }
    return stages;
}

arma::field<arma::cx_mat> team_statistics(const ScenarioStatistics &stats,
                                          const EstimationCache &cache,
                                          const ChannelFactors &factors, const PhaseBook &phases,
                                          std::uint64_t inner_samples, Rng &inner_rng,
                                          bool resample_phases)
{
    const std::uint64_t L = stats.L, K = stats.K;
    if (inner_samples < 1)
        throw validation_error("team_statistics: inner_samples must be at least 1");

    // residual phase uncertainty the conditioning leaves open
    double delta_eff;
    switch (cache.kind)
    {
    case Estimator::lmmse:
        delta_eff = cache.delta_rad;
        break;
    case Estimator::perfect_phase:
        delta_eff = 0.0;
        break;
    default:
        delta_eff = pi;
        break;
    }

    arma::field<arma::cx_mat> pi_acc(L);
    for (std::uint64_t l = 0; l < L; l++)
        pi_acc(l).zeros(K, K);

    PhaseBook inner;
    inner.delta = delta_eff;
    inner.rho = cache.rho;
    arma::mat base(K, L);

    for (std::uint64_t s = 0; s < inner_samples; s++)
    {
        if (resample_phases)
        {
            for (std::uint64_t l = 0; l < L; l++)
                for (std::uint64_t k = 0; k < K; k++)
                    base(k, l) = inner_rng.uniform(-pi, pi);
        }
        else
        {
            base = (cache.kind == Estimator::perfect_phase) ? phases.theta : phases.theta_hat;
        }

        inner.theta_hat = base;
        inner.theta = base;
        for (std::uint64_t l = 0; l < L; l++)
            for (std::uint64_t k = 0; k < K; k++)
                inner.theta(k, l) += inner_rng.symmetric(delta_eff);

        arma::cx_cube channels = sample_channels(stats, factors, inner.theta, inner_rng);
        arma::cx_cube pilots = pilot_observation(stats, channels, inner_rng);
        arma::cx_cube est = estimate_channels(stats, cache, pilots, inner);
        arma::cx_cube stages = local_stages(stats, cache, est);

        for (std::uint64_t l = 0; l < L; l++)
            pi_acc(l) += est.slice(l).t() * stages.slice(l);
    }

    arma::vec sqrt_p = arma::sqrt(stats.data_power_w);
    for (std::uint64_t l = 0; l < L; l++)
    {
        pi_acc(l) /= double(inner_samples);
        for (std::uint64_t k = 0; k < K; k++)
            pi_acc(l).row(k) *= sqrt_p(k);
        pi_acc(l) = 0.5 * (pi_acc(l) + pi_acc(l).t()); // Hermitian up to sampling noise
    }
    return pi_acc;
}

// two triangular sweeps against a lower Cholesky factor
static arma::cx_mat chol_solve(const arma::cx_mat &lower, const arma::cx_mat &rhs)
{
    arma::cx_mat y = arma::solve(arma::trimatl(lower), rhs);
    return arma::solve(arma::trimatu(lower.t()), y);
}

arma::field<arma::cx_mat> team_coefficients(const std::vector<arma::uvec> &serving,
                                            const arma::field<arma::cx_mat> &pi,
                                            TeamDiagnostics *diag)
{
    const std::uint64_t L = pi.n_elem;
    if (L == 0)
        throw validation_error("team_coefficients: no APs");
    const std::uint64_t K = pi(0).n_rows;

    TeamDiagnostics local;
    arma::field<arma::cx_mat> coeff(L);
    for (std::uint64_t l = 0; l < L; l++)
        coeff(l).zeros(K, K);

    std::map<std::vector<arma::uword>, std::vector<arma::uword>> groups;
    for (std::uint64_t k = 0; k < serving.size(); k++)
    {
        std::vector<arma::uword> key(serving[k].begin(), serving[k].end());
        groups[key].push_back(k);
    }

    // per-AP factors of (I - Pi_l), built lazily
    std::map<arma::uword, arma::cx_mat> chol_of;
    const arma::cx_mat eye(arma::eye<arma::cx_mat>(K, K));

    auto factor_of = [&](arma::uword l, arma::uword user) -> const arma::cx_mat & {
        auto it = chol_of.find(l);
        if (it != chol_of.end())
            return it->second;
        if (!pi(l).is_finite())
            throw numeric_error("team statistics not finite at AP " + std::to_string(l));
        arma::cx_mat m = eye - pi(l);
        double rc = arma::rcond(m);
        local.min_rcond = std::min(local.min_rcond, rc);
        if (rc < 1.0e-12)
            throw numeric_error("team system ill conditioned at AP " + std::to_string(l) +
                                " for user " + std::to_string(user));
        arma::cx_mat lower;
        if (!arma::chol(lower, m, "lower"))
            throw numeric_error("team statistics are not a contraction at AP " +
                                std::to_string(l) + " for user " + std::to_string(user));
        return chol_of.emplace(l, std::move(lower)).first->second;
    };

    for (const auto &[aps, users] : groups)
    {
        arma::uvec cols(users.size());
        for (std::uint64_t j = 0; j < users.size(); j++)
            cols(j) = users[j];

        if (aps.size() == 1)
        {
            // single serving AP: the equation is c = e_k, take it verbatim
            for (arma::uword k : users)
                coeff(aps[0])(k, k) = 1.0;
            continue;
        }

        // eliminate the per-AP blocks, solve one K x K system for the sum
        arma::cx_mat T(K, K, arma::fill::zeros);
        for (arma::uword l : aps)
            T += chol_solve(factor_of(l, users[0]), pi(l)); // (I - Pi)^-1 Pi

        arma::cx_mat iT = eye + T;
        double rc = arma::rcond(iT);
        local.min_rcond = std::min(local.min_rcond, rc);
        if (rc < 1.0e-12)
            throw numeric_error("team system ill conditioned for user " +
                                std::to_string(users[0]));
        arma::cx_mat lower;
        if (!arma::chol(lower, iT, "lower"))
            throw numeric_error("aggregated team system is not positive definite for user " +
                                std::to_string(users[0]));
        arma::cx_mat S = chol_solve(lower, arma::cx_mat(T.cols(cols)));

        arma::cx_mat rhs = -S;
        for (std::uint64_t j = 0; j < users.size(); j++)
            rhs(users[j], j) += 1.0; // e_k - S_k

        for (arma::uword l : aps)
        {
            arma::cx_mat c = chol_solve(factor_of(l, users[0]), rhs);
            for (std::uint64_t j = 0; j < users.size(); j++)
                coeff(l).col(users[j]) = c.col(j);
        }

        // residual of the original block equations, from the returned values
        arma::cx_mat mixed(K, users.size(), arma::fill::zeros);
        std::map<arma::uword, arma::cx_mat> pi_c;
        for (arma::uword l : aps)
        {
            arma::cx_mat cl(K, users.size());
            for (std::uint64_t j = 0; j < users.size(); j++)
                cl.col(j) = coeff(l).col(users[j]);
            pi_c[l] = pi(l) * cl;
            mixed += pi_c[l];
        }
        for (arma::uword l : aps)
        {
            arma::cx_mat resid = mixed - pi_c[l];
            for (std::uint64_t j = 0; j < users.size(); j++)
            {
                resid.col(j) += coeff(l).col(users[j]);
                resid(users[j], j) -= 1.0;
            }
            double worst = arma::abs(resid).max();
            local.max_residual = std::max(local.max_residual, worst);
        }
    }

    if (diag)
        *diag = local;
    return coeff;
}

arma::cx_mat distributed_combiners(const ScenarioStatistics &stats, const arma::cx_cube &local,
                                   const arma::field<arma::cx_mat> &coeff)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;
    if (coeff.n_elem != L)
        throw validation_error("distributed_combiners: coefficient field has wrong AP count");

    arma::cx_mat out(L * N, K, arma::fill::zeros);
    for (std::uint64_t l = 0; l < L; l++)
        out.rows(l * N, l * N + N - 1) = local.slice(l) * coeff(l);
    return out;
}

} // namespace cfsim
