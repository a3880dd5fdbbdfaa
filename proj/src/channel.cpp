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

#include "cfsim/channel.hpp"

#include <cmath>

namespace cfsim
{

double penalty_factor(double delta_rad)
{
    if (delta_rad < 0.0 || delta_rad > pi)
        throw std::domain_error("penalty_factor: delta must be in [0, pi]");
    if (delta_rad == 0.0)
        return 1.0;
    return std::sin(delta_rad) / delta_rad;
}

PhaseBook sample_phases(std::uint64_t K, std::uint64_t L, double delta_rad,
                        Rng &phase_rng, Rng &error_rng)
{
    PhaseBook pb;
    pb.delta = delta_rad;
    pb.rho = penalty_factor(delta_rad);
    pb.theta.set_size(K, L);
    pb.theta_hat.set_size(K, L);

    for (std::uint64_t l = 0; l < L; l++)
        for (std::uint64_t k = 0; k < K; k++)
            pb.theta(k, l) = phase_rng.uniform(-pi, pi);

    for (std::uint64_t l = 0; l < L; l++)
        for (std::uint64_t k = 0; k < K; k++)
            pb.theta_hat(k, l) = pb.theta(k, l) - error_rng.symmetric(delta_rad);

    return pb;
}

arma::cx_vec conditional_mean(const arma::cx_vec &los, double theta_hat, double rho)
{
    return los * (rho * std::complex<double>(std::cos(theta_hat), std::sin(theta_hat)));
}

arma::cx_mat conditional_cov(const arma::cx_vec &los, const arma::cx_mat &scatter_cov, double rho)
{
    // residual LoS power (1 - rho^2) moves from the mean into the covariance
    return scatter_cov + (1.0 - rho * rho) * (los * los.t());
}

ChannelFactors channel_factors(const ScenarioStatistics &stats)
{
    ChannelFactors f;
    f.sqrt_cov.set_size(stats.K, stats.L);

    for (std::uint64_t l = 0; l < stats.L; l++)
    {
        for (std::uint64_t k = 0; k < stats.K; k++)
        {
            const arma::cx_mat &R = stats.scatter_cov(k, l);
            arma::vec eval;
            arma::cx_mat evec;
            if (!arma::eig_sym(eval, evec, R))
                throw numeric_error("channel_factors: eigendecomposition failed for user " +
                                    std::to_string(k) + ", AP " + std::to_string(l));

            double tol = 1.0e-10 * std::max(arma::trace(arma::real(R)), 0.0);
            if (eval.min() < -tol)
                throw numeric_error("channel_factors: covariance not PSD for user " +
                                    std::to_string(k) + ", AP " + std::to_string(l) +
                                    " (min eigenvalue " + std::to_string(eval.min()) + ")");
            eval.transform([](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
            f.sqrt_cov(k, l) = evec * arma::diagmat(eval) * evec.t();
        }
    }
    return f;
}

arma::cx_cube sample_channels(const ScenarioStatistics &stats, const ChannelFactors &factors,
                              const arma::mat &theta, Rng &nlos_rng)
{
    const std::uint64_t L = stats.L, K = stats.K, N = stats.N;
    arma::cx_cube h(N, K, L);
    arma::cx_vec w(N);

    for (std::uint64_t l = 0; l < L; l++)
    {
        for (std::uint64_t k = 0; k < K; k++)
        {
            for (std::uint64_t m = 0; m < N; m++)
                w(m) = nlos_rng.cnormal();
            double th = theta(k, l);
            std::complex<double> rot(std::cos(th), std::sin(th));
            h.slice(l).col(k) = stats.los.slice(l).col(k) * rot + factors.sqrt_cov(k, l) * w;
        }
    }
    return h;
}

arma::cx_mat stack_aps(const arma::cx_cube &per_ap)
{
    const arma::uword N = per_ap.n_rows, K = per_ap.n_cols, L = per_ap.n_slices;
    arma::cx_mat out(L * N, K);
    for (arma::uword l = 0; l < L; l++)
        out.rows(l * N, l * N + N - 1) = per_ap.slice(l);
    return out;
}

} // namespace cfsim
