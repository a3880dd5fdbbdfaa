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

#include "cfsim/estimation.hpp"

#include <cmath>

namespace cfsim
{

EstimationCache build_estimation_cache(const ScenarioStatistics &stats, Estimator kind,
                                       double delta_rad)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;
    const double tau_p = double(stats.tau_p);

    EstimationCache c;
    c.kind = kind;
    c.delta_rad = delta_rad;

    switch (kind)
    {
    case Estimator::lmmse:
        c.rho = penalty_factor(delta_rad);
        break;
    case Estimator::perfect_phase:
        c.rho = 1.0;
        break;
    case Estimator::phase_blind:
        c.rho = 0.0;
        break;
    }

    c.prior_cov.set_size(K, L);
    for (std::uint64_t l = 0; l < L; l++)
    {
        for (std::uint64_t k = 0; k < K; k++)
        {
            const arma::cx_mat &R = stats.scatter_cov(k, l);
            const arma::cx_vec los = stats.los.slice(l).col(k);
            switch (kind)
            {
            case Estimator::lmmse:
                c.prior_cov(k, l) = conditional_cov(los, R, c.rho);
                break;
            case Estimator::perfect_phase:
                // exact phase knowledge leaves only the scattered part uncertain
                c.prior_cov(k, l) = R;
                break;
            case Estimator::phase_blind:
                // a uniformly random LoS phase makes the channel zero mean
                // with the full LoS power in the covariance
                c.prior_cov(k, l) = los * los.t() + R;
                break;
            }
        }
    }

    c.gain.set_size(K, L);
    c.err_cov.set_size(K, L);

    const arma::cx_mat eye(arma::eye<arma::cx_mat>(N, N));
    for (std::uint64_t l = 0; l < L; l++)
    {
        for (std::uint64_t t = 0; t < stats.tau_p; t++)
        {
            const arma::uvec &grp = stats.pilot_group[t];
            if (grp.n_elem == 0)
                continue;

            arma::cx_mat M = stats.noise_w * eye;
            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword i = grp(j);
                M += (stats.pilot_power_w(i) * tau_p) * c.prior_cov(i, l);
            }

            if (arma::rcond(M) < 1.0e-12)
                c.ill_conditioned++;

            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword k = grp(j);
                arma::cx_mat X;
                if (!arma::solve(X, M, c.prior_cov(k, l), arma::solve_opts::likely_sympd))
                    throw numeric_error("estimation: pilot system solve failed for pilot " +
                                        std::to_string(t) + ", AP " + std::to_string(l));
                double eta = stats.pilot_power_w(k);
                c.gain(k, l) = std::sqrt(eta) * X.t();
                arma::cx_mat C = c.prior_cov(k, l) - (eta * tau_p) * X.t() * c.prior_cov(k, l);
                c.err_cov(k, l) = 0.5 * (C + C.t());
            }
        }
    }

    c.noise_shaping.zeros(N, N, L);
    for (std::uint64_t l = 0; l < L; l++)
        for (std::uint64_t k = 0; k < K; k++)
            c.noise_shaping.slice(l) += stats.data_power_w(k) * c.err_cov(k, l);

    return c;
}

arma::cx_cube pilot_observation(const ScenarioStatistics &stats, const arma::cx_cube &channels,
                                Rng &noise_rng)
{
    const std::uint64_t L = stats.L, N = stats.N;
    const double tau_p = double(stats.tau_p);
    const double noise_scale = std::sqrt(stats.noise_w * tau_p);

    arma::cx_cube y(N, stats.tau_p, L, arma::fill::zeros);
    for (std::uint64_t l = 0; l < L; l++)
    {
        for (std::uint64_t t = 0; t < stats.tau_p; t++)
        {
            arma::cx_vec acc(N, arma::fill::zeros);
            const arma::uvec &grp = stats.pilot_group[t];
            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword i = grp(j);
                acc += (std::sqrt(stats.pilot_power_w(i)) * tau_p) * channels.slice(l).col(i);
            }
            for (std::uint64_t m = 0; m < N; m++)
                acc(m) += noise_scale * noise_rng.cnormal();
            y.slice(l).col(t) = acc;
        }
    }
    return y;
}

arma::cx_cube estimate_channels(const ScenarioStatistics &stats, const EstimationCache &cache,
                                const arma::cx_cube &pilot_obs, const PhaseBook &phases)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;
    const double tau_p = double(stats.tau_p);
    const bool zero_mean = (cache.kind == Estimator::phase_blind);
    const arma::mat &th = (cache.kind == Estimator::perfect_phase) ? phases.theta : phases.theta_hat;

    arma::cx_cube est(N, K, L);
    arma::cx_mat means(N, K);

    for (std::uint64_t l = 0; l < L; l++)
    {
        if (!zero_mean)
            for (std::uint64_t k = 0; k < K; k++)
                means.col(k) = conditional_mean(stats.los.slice(l).col(k), th(k, l), cache.rho);

        for (std::uint64_t t = 0; t < stats.tau_p; t++)
        {
            const arma::uvec &grp = stats.pilot_group[t];
            if (grp.n_elem == 0)
                continue;

            arma::cx_vec centered = pilot_obs.slice(l).col(t);
            if (!zero_mean)
                for (arma::uword j = 0; j < grp.n_elem; j++)
                {
                    arma::uword i = grp(j);
                    centered -= (std::sqrt(stats.pilot_power_w(i)) * tau_p) * means.col(i);
                }

            for (arma::uword j = 0; j < grp.n_elem; j++)
            {
                arma::uword k = grp(j);
                est.slice(l).col(k) = cache.gain(k, l) * centered;
                if (!zero_mean)
                    est.slice(l).col(k) += means.col(k);
            }
        }
    }
    return est;
}

} // namespace cfsim
