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

#ifndef CFSIM_CHANNEL_HPP
#define CFSIM_CHANNEL_HPP

#include "cfsim/common.hpp"
#include "cfsim/rng.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim
{

// Channel model per link: h = los * e^{j theta} + scattered, where theta is
// uniform on [-pi, pi) and redrawn every coherence block, and the receiver
// only knows an estimate theta_hat = theta - eps with eps uniform on
// [-delta, delta]. Conditioned on theta_hat the residual phase shrinks the
// usable LoS component by the penalty factor rho = sin(delta)/delta and
// inflates the covariance by the leftover LoS power.

// sin(delta)/delta on [0, pi]; 1 at delta = 0. Out of range throws.
double penalty_factor(double delta_rad);

struct PhaseBook
{
    arma::mat theta;     // K x L, true phases
    arma::mat theta_hat; // K x L, tracker output
    double delta = 0.0;  // error bound in radians
    double rho = 1.0;    // penalty factor for that bound
};

// True phases from phase_rng, tracking errors from error_rng. Both streams
// are always consumed in full so that runs with different delta stay paired
// draw-by-draw.
PhaseBook sample_phases(std::uint64_t K, std::uint64_t L, double delta_rad,
                        Rng &phase_rng, Rng &error_rng);

// First and second conditional moments given the phase estimate.
arma::cx_vec conditional_mean(const arma::cx_vec &los, double theta_hat, double rho);
arma::cx_mat conditional_cov(const arma::cx_vec &los, const arma::cx_mat &scatter_cov, double rho);

// Hermitian square roots of the scattering covariances, cached per drop.
// Eigenvalues below -tol * trace trigger an error naming the link; small
// negative ripple is clipped to zero.
struct ChannelFactors
{
    arma::field<arma::cx_mat> sqrt_cov; // K x L
};

ChannelFactors channel_factors(const ScenarioStatistics &stats);

// One fading realization for every link: los rotated by the true phase plus
// a correlated circularly symmetric draw. AP-major, user-minor draw order.
arma::cx_cube sample_channels(const ScenarioStatistics &stats, const ChannelFactors &factors,
                              const arma::mat &theta, Rng &nlos_rng);

// N x K x L cube to (L*N) x K matrix, AP blocks stacked in index order.
arma::cx_mat stack_aps(const arma::cx_cube &per_ap);

} // namespace cfsim

#endif
