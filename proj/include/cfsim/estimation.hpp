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

#ifndef CFSIM_ESTIMATION_HPP
#define CFSIM_ESTIMATION_HPP

#include "cfsim/channel.hpp"
#include "cfsim/common.hpp"
#include "cfsim/config.hpp"
#include "cfsim/rng.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim
{

// Per-drop estimator state. The estimate of each link is
//
//   est = mean + gain * (obs - obs_mean)
//
// where mean/obs_mean depend on the phase information the estimator kind
// conditions on:
//
//   lmmse          mean uses theta_hat scaled by rho, prior covariance is
//                  the conditional one (scatter plus leftover LoS power)
//   perfect-phase  mean uses the true theta, prior covariance is the
//                  scatter covariance alone
//   phase-blind    zero mean, prior covariance carries the full LoS power
//
// gain, error covariance and the aggregate error term are phase independent
// and cached here once per (drop, kind, delta).
struct EstimationCache
{
    Estimator kind = Estimator::lmmse;
    double delta_rad = 0.0;
    double rho = 1.0;

    arma::field<arma::cx_mat> prior_cov; // K x L, N x N
    arma::field<arma::cx_mat> gain;      // K x L, N x N
    arma::field<arma::cx_mat> err_cov;   // K x L, N x N
    arma::cx_cube noise_shaping;         // N x N x L, power-weighted error covariance sum

    std::uint64_t ill_conditioned = 0; // pilot systems with rcond below 1e-12
};

EstimationCache build_estimation_cache(const ScenarioStatistics &stats, Estimator kind,
                                       double delta_rad);

// Despread pilot block: N x tau_p x L. Per pilot, the superposition of the
// sharing users' channels weighted by sqrt(power) * tau_p, plus noise of
// variance noise_w * tau_p per antenna.
arma::cx_cube pilot_observation(const ScenarioStatistics &stats, const arma::cx_cube &channels,
                                Rng &noise_rng);

// Linear estimate of every link from the pilot block. N x K x L.
arma::cx_cube estimate_channels(const ScenarioStatistics &stats, const EstimationCache &cache,
                                const arma::cx_cube &pilot_obs, const PhaseBook &phases);

} // namespace cfsim

#endif
