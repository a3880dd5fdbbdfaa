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

#include "cfsim/rates.hpp"

#include <cmath>

namespace cfsim
{

static const double log2e = 1.4426950408889634074;

arma::cx_mat effective_gains(const arma::cx_mat &channels, const arma::cx_mat &combiners,
                             const arma::vec &data_power_w)
{
    if (channels.n_rows != combiners.n_rows || channels.n_cols != combiners.n_cols)
        throw validation_error("effective_gains: shape mismatch between channels and combiners");
    arma::cx_mat g = combiners.t() * channels; // K x K, row = receiving user
    for (arma::uword i = 0; i < g.n_cols; i++)
        g.col(i) *= std::sqrt(data_power_w(i));
    return g;
}

TrialRates trial_rates(const arma::cx_mat &gains, const arma::cx_mat &combiners, double noise_w)
{
    const arma::uword K = gains.n_rows;
    TrialRates tr;
    tr.signal.set_size(K);
    tr.gain_power.set_size(K);
    tr.noise_power.set_size(K);
    tr.oer_log.set_size(K);

    for (arma::uword k = 0; k < K; k++)
    {
        tr.signal(k) = gains(k, k);
        double total = 0.0;
        for (arma::uword i = 0; i < K; i++)
            total += std::norm(gains(k, i));
        tr.gain_power(k) = total;
        double nz = noise_w * std::real(arma::cdot(combiners.col(k), combiners.col(k)));
        tr.noise_power(k) = nz;

        double own = std::norm(gains(k, k));
        double denom = (total - own) + nz;
        if (denom <= 0.0)
        {
            if (own == 0.0)
            {
                tr.oer_log(k) = 0.0;
                continue;
            }
            denom = 1.0e-15 * own; // all-interference-free corner, keep it finite
            tr.clamped++;
        }
        tr.oer_log(k) = std::log1p(own / denom) * log2e;
    }
    return tr;
}

RateAccumulator::RateAccumulator(std::uint64_t num_users, std::uint64_t capacity)
    : K(num_users), slots(capacity)
{
    sig_re.zeros(capacity, num_users);
    sig_im.zeros(capacity, num_users);
    gain_pow.zeros(capacity, num_users);
    noise_pow.zeros(capacity, num_users);
    oer_log_m.zeros(capacity, num_users);
    filled.assign(capacity, 0);
    trial_clamped.assign(capacity, 0);
}

void RateAccumulator::set_trial(std::uint64_t trial, const TrialRates &tr)
{
    if (trial >= slots)
        throw validation_error("RateAccumulator: trial index out of range");
    if (tr.signal.n_elem != K)
        throw validation_error("RateAccumulator: user count mismatch");
    if (filled[trial])
        throw validation_error("RateAccumulator: trial already recorded");

    for (std::uint64_t k = 0; k < K; k++)
    {
        sig_re(trial, k) = tr.signal(k).real();
        sig_im(trial, k) = tr.signal(k).imag();
        gain_pow(trial, k) = tr.gain_power(k);
        noise_pow(trial, k) = tr.noise_power(k);
        oer_log_m(trial, k) = tr.oer_log(k);
    }
    trial_clamped[trial] = tr.clamped;
    filled[trial] = 1;
}

void RateAccumulator::merge(const RateAccumulator &other)
{
    if (other.K != K || other.slots != slots)
        throw validation_error("RateAccumulator: merge shape mismatch");
    for (std::uint64_t t = 0; t < slots; t++)
    {
        if (!other.filled[t])
            continue;
        if (filled[t])
            throw validation_error("RateAccumulator: merge overlap at trial " + std::to_string(t));
        sig_re.row(t) = other.sig_re.row(t);
        sig_im.row(t) = other.sig_im.row(t);
        gain_pow.row(t) = other.gain_pow.row(t);
        noise_pow.row(t) = other.noise_pow.row(t);
        oer_log_m.row(t) = other.oer_log_m.row(t);
        trial_clamped[t] = other.trial_clamped[t];
        filled[t] = 1;
    }
}

std::uint64_t RateAccumulator::filled_count() const
{
    std::uint64_t n = 0;
    for (char f : filled)
        n += (f != 0);
    return n;
}

RateReport RateAccumulator::finalize(double prelog) const
{
    const std::uint64_t T = slots;
    if (T < 2)
        throw validation_error("RateAccumulator: at least two trials required");
    if (filled_count() != T)
        throw validation_error("RateAccumulator: finalize with unfilled trials");

    RateReport rep;
    rep.trials = T;
    rep.se_uatf.set_size(K);
    rep.se_uatf_err.set_size(K);
    rep.se_oer.set_size(K);
    rep.se_oer_err.set_size(K);
    for (std::uint64_t t = 0; t < T; t++)
        rep.clamped += trial_clamped[t];

    for (std::uint64_t k = 0; k < K; k++)
    {
        arma::mat samples(T, 4);
        samples.col(0) = sig_re.col(k);
        samples.col(1) = sig_im.col(k);
        samples.col(2) = gain_pow.col(k);
        samples.col(3) = noise_pow.col(k);

        arma::rowvec u = arma::mean(samples, 0);
        double a = u(0) * u(0) + u(1) * u(1);
        double denom = u(2) - a + u(3);
        if (denom <= 0.0)
        {
            // non-negative in exact arithmetic; FP cancellation only
            denom = 1.0e-15 * (u(2) + u(3));
            if (denom <= 0.0)
                denom = 1.0e-300;
            rep.clamped++;
        }
        double sinr = a / denom;
        rep.se_uatf(k) = prelog * std::log1p(sinr) * log2e;

        // delta method for the standard error of log2(1 + a/denom)
        arma::vec grad(4);
        grad(0) = 2.0 * u(0) * (denom + a) / (denom * denom);
        grad(1) = 2.0 * u(1) * (denom + a) / (denom * denom);
        grad(2) = -a / (denom * denom);
        grad(3) = -a / (denom * denom);
        grad *= prelog * log2e / (1.0 + sinr);
        arma::mat S = arma::cov(samples);
        double var = arma::as_scalar(grad.t() * S * grad) / double(T);
        rep.se_uatf_err(k) = var > 0.0 ? std::sqrt(var) : 0.0;

        rep.se_oer(k) = prelog * arma::mean(oer_log_m.col(k));
        rep.se_oer_err(k) = prelog * arma::stddev(oer_log_m.col(k)) / std::sqrt(double(T));
    }
    return rep;
}

} // namespace cfsim
