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

#ifndef CFSIM_RATES_HPP
#define CFSIM_RATES_HPP

#include "cfsim/common.hpp"

#include <cstdint>

namespace cfsim
{

// Spectral-efficiency accounting. Two bounds are tracked per user:
//
//   uatf ("use and then forget"): only the mean effective gain counts as
//   signal, every gain fluctuation counts as interference. Needs
//   expectations of the per-trial statistics, so it forms at finalize time.
//
//   oer (optimistic ergodic rate): average of the per-trial log of the
//   instantaneous SINR; attainable only with genie gain knowledge at the
//   decoder, hence an upper reference for the uatf value.
//
// Both use log base 2 and an optional prelog factor for pilot overhead.

// Per-trial statistics for every user, produced from the true channels.
struct TrialRates
{
    arma::cx_vec signal;  // own effective gain, v_k^H h_k sqrt(p_k)
    arma::vec gain_power; // sum_i |v_k^H h_i|^2 p_i, own term included
    arma::vec noise_power; // noise_w * ||v_k||^2
    arma::vec oer_log;     // per-trial log2(1 + instantaneous SINR)
    std::uint64_t clamped = 0;
};

// G(k, i) = sqrt(p_i) v_k^H h_i on the true stacked channels.
arma::cx_mat effective_gains(const arma::cx_mat &channels, const arma::cx_mat &combiners,
                             const arma::vec &data_power_w);

TrialRates trial_rates(const arma::cx_mat &gains, const arma::cx_mat &combiners, double noise_w);

struct RateReport
{
    arma::vec se_uatf;     // K
    arma::vec se_uatf_err; // delta-method standard error of the mean
    arma::vec se_oer;      // K
    arma::vec se_oer_err;  // sample standard error
    std::uint64_t trials = 0;
    std::uint64_t clamped = 0; // degenerate denominators encountered
};

// Fixed-capacity store of per-trial statistics, indexed by trial. Distinct
// trials may be filled concurrently; finalize always reduces in trial order,
// so results do not depend on scheduling. merge unites disjointly filled
// accumulators of the same shape (associative and commutative by
// construction).
class RateAccumulator
{
  public:
    RateAccumulator() = default;
    RateAccumulator(std::uint64_t num_users, std::uint64_t capacity);

    void set_trial(std::uint64_t trial, const TrialRates &tr);
    void merge(const RateAccumulator &other);

    std::uint64_t capacity() const { return slots; }
    std::uint64_t filled_count() const;

    // Throws unless every slot is filled and there are at least two trials.
    RateReport finalize(double prelog) const;

  private:
    std::uint64_t K = 0, slots = 0;
    arma::mat sig_re, sig_im, gain_pow, noise_pow, oer_log_m; // capacity x K
    std::vector<char> filled;
    std::vector<std::uint64_t> trial_clamped;
};

} // namespace cfsim

#endif
