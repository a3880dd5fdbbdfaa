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

#include "cfsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfsim
{

double pathloss_db(double distance_m, double carrier_freq_ghz, std::uint64_t *clamp_counter)
{
    if (distance_m < 1.0)
    {
        // the model is calibrated for d >= 1 m; closer links are clamped
        distance_m = 1.0;
        if (clamp_counter)
            (*clamp_counter)++;
    }
    return 35.4 - 20.0 * std::log10(carrier_freq_ghz) - 26.0 * std::log10(distance_m);
}

double noise_power_w(double bandwidth_hz, double noise_figure_db)
{
    // thermal floor of -174 dBm/Hz plus the receiver noise figure
    double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double wrap_displacement(double a, double b, double side)
{
    double d = b - a;
    d -= side * std::floor(d / side + 0.5);
    return d;
}

arma::cx_vec steering_vector(double sin_az, std::uint64_t n, double spacing_wl)
{
    arma::cx_vec a(n);
    for (std::uint64_t m = 0; m < n; m++)
    {
        double arg = 2.0 * pi * spacing_wl * double(m) * sin_az;
        a(m) = std::complex<double>(std::cos(arg), std::sin(arg));
    }
    return a;
}

void gauss_hermite(std::uint64_t order, arma::vec &nodes, arma::vec &weights)
{
    if (order < 1)
        throw validation_error("gauss_hermite: order must be at least 1");

    // Golub-Welsch on the symmetric tridiagonal Jacobi matrix
    arma::mat J(order, order, arma::fill::zeros);
    for (std::uint64_t i = 1; i < order; i++)
    {
        double b = std::sqrt(double(i) / 2.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    arma::vec eval;
    arma::mat evec;
    if (!arma::eig_sym(eval, evec, J))
        throw numeric_error("gauss_hermite: eigendecomposition failed");

    nodes = eval;
    weights.set_size(order);
    for (std::uint64_t i = 0; i < order; i++)
        weights(i) = evec(0, i) * evec(0, i);
    weights /= arma::accu(weights); // exact unit mass, sqrt(pi) folded away
}

arma::cx_mat scattering_correlation(double sin_az, double cos_az, double spread_rad,
                                    std::uint64_t n, double spacing_wl)
{
    if (spread_rad == 0.0)
    {
        arma::cx_vec a = steering_vector(sin_az, n, spacing_wl);
        return a * a.t();
    }

    static thread_local arma::vec nodes, wts;
    if (nodes.n_elem != 20)
        gauss_hermite(20, nodes, wts);

    // average the rank-one response over a Gaussian perturbation of the
    // azimuth; sums of a a^H keep the matrix exactly PSD with unit diagonal
    arma::cx_mat gamma(n, n, arma::fill::zeros);
    for (arma::uword i = 0; i < nodes.n_elem; i++)
    {
        double e = std::sqrt(2.0) * spread_rad * nodes(i);
        double s = sin_az * std::cos(e) + cos_az * std::sin(e);
        arma::cx_vec a = steering_vector(s, n, spacing_wl);
        gamma += wts(i) * (a * a.t());
    }
    return gamma;
}

arma::uvec assign_pilots(PilotScheme scheme, const arma::mat &beta, std::uint64_t tau_p)
{
    const arma::uword K = beta.n_rows;
    if (tau_p < 1)
        throw validation_error("assign_pilots: tau_p must be at least 1");

    arma::uvec pilot(K);

    if (scheme == PilotScheme::round_robin)
    {
        for (arma::uword k = 0; k < K; k++)
            pilot(k) = k % tau_p;
        return pilot;
    }

    for (arma::uword k = 0; k < K; k++)
    {
        if (k < tau_p)
        {
            pilot(k) = k;
            continue;
        }
        arma::uword strongest = beta.row(k).index_max();
        double best = 0.0;
        arma::uword best_t = 0;
        for (arma::uword t = 0; t < tau_p; t++)
        {
            double load = 0.0;
            for (arma::uword i = 0; i < k; i++)
                if (pilot(i) == t)
                    load += beta(i, strongest);
            if (t == 0 || load < best)
            {
                best = load;
                best_t = t;
            }
        }
        pilot(k) = best_t;
    }
    return pilot;
}

std::vector<arma::uvec> select_clusters(const arma::mat &beta, std::uint64_t q)
{
    const arma::uword K = beta.n_rows, L = beta.n_cols;
    std::vector<arma::uvec> serving(K);

    if (q == 0 || q >= L)
    {
        arma::uvec all = arma::regspace<arma::uvec>(0, L - 1);
        for (arma::uword k = 0; k < K; k++)
            serving[k] = all;
        return serving;
    }

    std::vector<arma::uword> order(L);
    for (arma::uword k = 0; k < K; k++)
    {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](arma::uword a, arma::uword b) {
            if (beta(k, a) != beta(k, b))
                return beta(k, a) > beta(k, b);
            return a < b;
        });
        arma::uvec sel(q);
        for (std::uint64_t i = 0; i < q; i++)
            sel(i) = order[i];
        serving[k] = arma::sort(sel);
    }
    return serving;
}

arma::vec data_powers(const ScenarioConfig &config, const arma::mat &beta,
                      const std::vector<arma::uvec> &serving)
{
    const arma::uword K = beta.n_rows;
    arma::vec p(K);
    p.fill(config.max_power_w);
    if (config.power_control == PowerControl::full)
        return p;

    // fractional rule on the aggregate serving-cluster gain
    arma::vec b(K);
    for (arma::uword k = 0; k < K; k++)
    {
        double sum = 0.0;
        for (arma::uword j = 0; j < serving[k].n_elem; j++)
            sum += beta(k, serving[k](j));
        b(k) = sum;
    }
    double bmin = b.min();
    for (arma::uword k = 0; k < K; k++)
        p(k) = config.max_power_w * std::pow(bmin / b(k), config.power_exponent);
    return p;
}

ScenarioStatistics generate_drop(const ScenarioConfig &config, std::uint64_t seed)
{
    validate_scenario(config);

    const arma::uword L = config.num_aps;
    const arma::uword K = config.num_users;
    const arma::uword N = config.antennas_per_ap;
    const double side = config.area_side_m;
    const double kappa = config.rician_kappa;

    ScenarioStatistics st;
    st.L = L;
    st.K = K;
    st.N = N;
    st.tau_p = config.pilot_symbols;
    st.kappa = kappa;
    st.side_m = side;
    st.noise_w = noise_power_w(config.bandwidth_hz, config.noise_figure_db);

    Rng rng = make_stream(seed, 0, 0, Stream::scenario);

    st.ap_xy.set_size(L, 2);
    for (arma::uword l = 0; l < L; l++)
    {
        st.ap_xy(l, 0) = rng.uniform(0.0, side);
        st.ap_xy(l, 1) = rng.uniform(0.0, side);
    }
    st.user_xy.set_size(K, 2);
    for (arma::uword k = 0; k < K; k++)
    {
        st.user_xy(k, 0) = rng.uniform(0.0, side);
        st.user_xy(k, 1) = rng.uniform(0.0, side);
    }

    arma::mat shadow(K, L);
    for (arma::uword l = 0; l < L; l++)
        for (arma::uword k = 0; k < K; k++)
            shadow(k, l) = config.shadow_std_db * rng.normal();

    st.dist3.set_size(K, L);
    st.beta.set_size(K, L);
    st.sin_az.set_size(K, L);
    st.cos_az.set_size(K, L);

    // wrap-around torus: each link uses the nearest image of the user
    for (arma::uword l = 0; l < L; l++)
    {
        for (arma::uword k = 0; k < K; k++)
        {
            double dx = wrap_displacement(st.ap_xy(l, 0), st.user_xy(k, 0), side);
            double dy = wrap_displacement(st.ap_xy(l, 1), st.user_xy(k, 1), side);
            double dh = std::sqrt(dx * dx + dy * dy);
            st.dist3(k, l) = std::sqrt(dh * dh + config.height_diff_m * config.height_diff_m);

            double pl = pathloss_db(st.dist3(k, l), config.carrier_freq_ghz, &st.distance_clamped);
            st.beta(k, l) = std::pow(10.0, (pl + shadow(k, l)) / 10.0);

            if (dh > 0.0)
            {
                st.sin_az(k, l) = dx / dh;
                st.cos_az(k, l) = dy / dh;
            }
            else
            {
                st.sin_az(k, l) = 0.0;
                st.cos_az(k, l) = 1.0;
            }
        }
    }

    const double spread = config.angular_spread_deg * pi / 180.0;
    st.los.set_size(N, K, L);
    st.scatter_cov.set_size(K, L);
    for (arma::uword l = 0; l < L; l++)
    {
        for (arma::uword k = 0; k < K; k++)
        {
            double b = st.beta(k, l);
            arma::cx_vec a = steering_vector(st.sin_az(k, l), N, config.antenna_spacing_wl);
            st.los.slice(l).col(k) = std::sqrt(b * kappa / (kappa + 1.0)) * a;
            st.scatter_cov(k, l) =
                (b / (kappa + 1.0)) *
                scattering_correlation(st.sin_az(k, l), st.cos_az(k, l), spread, N,
                                       config.antenna_spacing_wl);
        }
    }

    st.pilot_of = assign_pilots(config.pilot_scheme, st.beta, st.tau_p);
    st.pilot_group.assign(st.tau_p, arma::uvec());
    for (arma::uword t = 0; t < st.tau_p; t++)
        st.pilot_group[t] = arma::find(st.pilot_of == t);

    st.serving = select_clusters(st.beta, config.cluster_size);

    st.pilot_power_w.set_size(K);
    st.pilot_power_w.fill(config.max_power_w);
    st.data_power_w = data_powers(config, st.beta, st.serving);

    return st;
}

} // namespace cfsim
