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

#ifndef CFSIM_BEAMFORMING_HPP
#define CFSIM_BEAMFORMING_HPP

#include "cfsim/channel.hpp"
#include "cfsim/common.hpp"
#include "cfsim/estimation.hpp"

namespace cfsim
{

// Receive combining against the virtual observation model: estimated
// channels carry the signal, while estimation errors enter as extra
// spatially colored noise (the noise_shaping blocks of the cache).

// Stacked (L*N) x K combiners, one column per user, solved jointly over each
// user's serving cluster and zero outside it. The solve runs on the reduced
// cluster subspace; users sharing a cluster share one factorization.
arma::cx_mat centralized_combiners(const ScenarioStatistics &stats, const EstimationCache &cache,
                                   const arma::cx_cube &est);

// Per-AP combining stages V_l (N x K each, one slice per AP), the local
// solve every AP can do from its own estimates alone.
arma::cx_cube local_stages(const ScenarioStatistics &stats, const EstimationCache &cache,
                           const arma::cx_cube &est);

// Expected cross-gain between estimates and local stages, conditioned on the
// phase information shared by all APs:
//
//   Pi_l = sqrt(P) E[ est_l^H V_l | shared phase info ]
//
// estimated by inner Monte Carlo draws of (phases, scatter, pilot noise)
// consistent with that conditioning. resample_phases = true integrates the
// shared information out as well, giving the unconditional average used by
// the coarser per-drop granularity.
arma::field<arma::cx_mat> team_statistics(const ScenarioStatistics &stats,
                                          const EstimationCache &cache,
                                          const ChannelFactors &factors, const PhaseBook &phases,
                                          std::uint64_t inner_samples, Rng &inner_rng,
                                          bool resample_phases);

struct TeamDiagnostics
{
    double max_residual = 0.0; // worst block-equation residual entry
    double min_rcond = 1.0;    // conditioning of the eliminated systems
};

// Mixing coefficients solving, for every user k and serving AP l,
//
//   c_{k,l} + sum_{j in L_k, j != l} Pi_j c_{k,j} = e_k .
//
// Returned as one K x K matrix per AP whose column k is c_{k,l} (zero for
// non-serving pairs). Solved exactly by block elimination: with
// S_k = sum_j Pi_j c_{k,j}, each block gives c_{k,l} = (I - Pi_l)^{-1} (e_k - S_k)
// and S_k solves a single K x K system, so the cost stays linear in the
// cluster size instead of cubic in it. Singleton clusters short-circuit to
// c_{k,l} = e_k. Diagnostics report the residual of the displayed equation
// recomputed from the returned coefficients.
arma::field<arma::cx_mat> team_coefficients(const std::vector<arma::uvec> &serving,
                                            const arma::field<arma::cx_mat> &pi,
                                            TeamDiagnostics *diag = nullptr);

// Assemble the stacked distributed combiner v_{k,l} = V_l c_{k,l}.
arma::cx_mat distributed_combiners(const ScenarioStatistics &stats, const arma::cx_cube &local,
                                   const arma::field<arma::cx_mat> &coeff);

} // namespace cfsim

#endif
