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

#ifndef CFSIM_SCENARIO_HPP
#define CFSIM_SCENARIO_HPP

#include "cfsim/common.hpp"
#include "cfsim/config.hpp"
#include "cfsim/rng.hpp"

#include <vector>

namespace cfsim
{

// Everything about one network realization ("drop") that stays fixed over
// the fading trials: geometry, large-scale gains, spatial statistics, pilot
// assignment, serving clusters and transmit powers.
//
// Conventions: beta and friends are K x L (user row, AP column). The LoS
// directions are unit-modulus steering vectors scaled so that per link
// norm(los)^2 + trace(scatter_cov) = N * beta, with the split controlled by
// the Rician factor. Phases are NOT part of the drop; they change per trial.
struct ScenarioStatistics
{
    std::uint64_t L = 0, K = 0, N = 0, tau_p = 0;
    double kappa = 0.0;
    double noise_w = 0.0;
    double side_m = 0.0;

    arma::mat ap_xy;   // L x 2
    arma::mat user_xy; // K x 2
    arma::mat dist3;   // K x L, 3D distance including the height offset
    arma::mat beta;    // K x L, linear channel gain
    arma::mat sin_az;  // K x L, azimuth seen from the AP array
    arma::mat cos_az;

    arma::cx_cube los;                     // N x K x L, deterministic component before phase rotation
    arma::field<arma::cx_mat> scatter_cov; // K x L entries of N x N, Hermitian PSD

    arma::uvec pilot_of;                 // K, pilot index of each user
    std::vector<arma::uvec> pilot_group; // tau_p lists of users sharing a pilot
    std::vector<arma::uvec> serving;     // K ascending AP index lists

    arma::vec pilot_power_w; // K
    arma::vec data_power_w;  // K

    std::uint64_t distance_clamped = 0; // links closer than the model's 1 m floor
};

// Deterministic given (config, seed). Draw order is part of the contract:
// AP positions, then user positions, then shadow fading (AP-major).
ScenarioStatistics generate_drop(const ScenarioConfig &config, std::uint64_t seed);

// Median large-scale gain in dB (negative); distance below 1 m is clamped
// and counted if a counter is supplied.
double pathloss_db(double distance_m, double carrier_freq_ghz,
                   std::uint64_t *clamp_counter = nullptr);

// Receiver noise power in watts over the given bandwidth.
double noise_power_w(double bandwidth_hz, double noise_figure_db);

// Signed displacement a -> b on a circle of the given circumference,
// minimal in magnitude (ties resolve to -side/2).
double wrap_displacement(double a, double b, double side);

// Uniform linear array response for a given azimuth sine.
arma::cx_vec steering_vector(double sin_az, std::uint64_t n, double spacing_wl);

// Correlation matrix of the scattered component around a nominal azimuth
// under a Gaussian angular spread (unit diagonal, Hermitian PSD).
arma::cx_mat scattering_correlation(double sin_az, double cos_az, double spread_rad,
                                    std::uint64_t n, double spacing_wl);

// Gauss-Hermite rule used by scattering_correlation, exposed for testing.
// weights are normalized to sum to 1 (probabilists' convention folded in).
void gauss_hermite(std::uint64_t order, arma::vec &nodes, arma::vec &weights);

// Pilot assignment. greedy: first tau_p users get distinct pilots, then each
// user takes the pilot with least co-pilot gain at its strongest AP.
arma::uvec assign_pilots(PilotScheme scheme, const arma::mat &beta, std::uint64_t tau_p);

// Serving clusters: the q strongest APs per user (q = 0 selects all APs).
// Ties resolve to the lower AP index; lists come back sorted ascending.
std::vector<arma::uvec> select_clusters(const arma::mat &beta, std::uint64_t q);

// Per-user data powers under the configured policy.
arma::vec data_powers(const ScenarioConfig &config, const arma::mat &beta,
                      const std::vector<arma::uvec> &serving);

} // namespace cfsim

#endif
