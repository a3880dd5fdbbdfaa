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

#include "cfsim/channel.hpp"
#include "cfsim/scenario.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace cfsim;

namespace
{
ScenarioConfig tiny_config()
{
    ScenarioConfig c;
    c.num_aps = 4;
    c.num_users = 3;
    c.antennas_per_ap = 2;
    c.pilot_symbols = 3;
    c.area_side_m = 300.0;
    return c;
}
} // namespace

TEST_CASE("penalty factor closed form")
{
    CHECK(penalty_factor(0.0) == 1.0);
    CHECK(penalty_factor(pi / 2) == Catch::Approx(2.0 / pi).epsilon(1e-14));
    CHECK(std::fabs(penalty_factor(pi)) < 1e-15);
    CHECK_THROWS_AS(penalty_factor(-0.1), std::domain_error);
    CHECK_THROWS_AS(penalty_factor(pi + 0.1), std::domain_error);
}

TEST_CASE("penalty factor equals the average phasor under bounded error")
{
    Rng rng(31);
    for (double delta : {0.3, 1.0, 2.0, pi})
    {
        const int n = 1000000;
        double re = 0.0, im = 0.0;
        for (int i = 0; i < n; i++)
        {
            double e = rng.symmetric(delta);
            re += std::cos(e);
            im += std::sin(e);
        }
        CHECK(re / n == Catch::Approx(penalty_factor(delta)).margin(3e-3));
        CHECK(std::fabs(im / n) < 3e-3);
    }
}

TEST_CASE("sampled phases stay in range and respect the error bound")
{
    const double delta = 0.7;
    Rng pr(1), er(2);
    PhaseBook pb = sample_phases(5, 6, delta, pr, er);
    REQUIRE(pb.theta.n_rows == 5);
    REQUIRE(pb.theta.n_cols == 6);
    CHECK(pb.delta == delta);
    CHECK(pb.rho == Catch::Approx(std::sin(delta) / delta));
    for (arma::uword i = 0; i < pb.theta.n_elem; i++)
    {
        CHECK(pb.theta(i) >= -pi);
        CHECK(pb.theta(i) < pi);
        CHECK(std::fabs(pb.theta(i) - pb.theta_hat(i)) <= delta);
    }
}

TEST_CASE("true phases are paired across different error bounds")
{
    // identical streams, different delta: theta must match draw for draw
    Rng p1(11), e1(12), p2(11), e2(12);
    PhaseBook a = sample_phases(4, 4, 0.1, p1, e1);
    PhaseBook b = sample_phases(4, 4, 2.5, p2, e2);
    CHECK(arma::all(arma::vectorise(a.theta == b.theta)));
    // and the error draws are scaled versions of each other
    arma::mat ea = a.theta_hat - a.theta;
    arma::mat eb = b.theta_hat - b.theta;
    CHECK(arma::norm(ea / 0.1 - eb / 2.5, "fro") < 1e-12);
}

TEST_CASE("conditional moments match simulation")
{
    ScenarioStatistics st = generate_drop(tiny_config(), 21);
    ChannelFactors f = channel_factors(st);
    const arma::uword k = 1, l = 2;
    arma::cx_vec los = st.los.slice(l).col(k);
    arma::cx_mat R = st.scatter_cov(k, l);

    const double delta = 0.9;
    const double rho = penalty_factor(delta);
    const double theta_hat = 0.4;

    Rng rng(77);
    const int n = 200000;
    arma::cx_vec mean_acc(los.n_elem, arma::fill::zeros);
    arma::cx_mat cov_acc(los.n_elem, los.n_elem, arma::fill::zeros);
    for (int i = 0; i < n; i++)
    {
        double theta = theta_hat + rng.symmetric(delta);
        arma::cx_vec w(los.n_elem);
        for (arma::uword m = 0; m < w.n_elem; m++)
            w(m) = rng.cnormal();
        arma::cx_vec h = los * std::exp(std::complex<double>(0, theta)) + f.sqrt_cov(k, l) * w;
        mean_acc += h;
        cov_acc += h * h.t();
    }
    mean_acc /= n;
    cov_acc = cov_acc / n - mean_acc * mean_acc.t();

    arma::cx_vec mu = conditional_mean(los, theta_hat, rho);
    arma::cx_mat sig = conditional_cov(los, R, rho);
    CHECK(arma::norm(mu - mean_acc) / arma::norm(mu) < 0.02);
    CHECK(arma::norm(sig - cov_acc, "fro") / arma::norm(sig, "fro") < 0.02);
}

TEST_CASE("covariance square roots reproduce their matrices")
{
    ScenarioStatistics st = generate_drop(tiny_config(), 5);
    ChannelFactors f = channel_factors(st);
    for (arma::uword l = 0; l < st.L; l++)
        for (arma::uword k = 0; k < st.K; k++)
        {
            const arma::cx_mat &s = f.sqrt_cov(k, l);
            CHECK(arma::norm(s * s.t() - st.scatter_cov(k, l), "fro") <
                  1e-10 * arma::norm(st.scatter_cov(k, l), "fro"));
        }
}

TEST_CASE("channel samples have the unconditional moments")
{
    ScenarioConfig c = tiny_config();
    c.num_aps = 1;
    c.num_users = 1;
    ScenarioStatistics st = generate_drop(c, 17);
    ChannelFactors f = channel_factors(st);

    const int n = 40000;
    arma::cx_vec mean_acc(st.N, arma::fill::zeros);
    arma::cx_mat cov_acc(st.N, st.N, arma::fill::zeros);
    Rng phase_rng(3), err_rng(4), nlos_rng(5);
    for (int i = 0; i < n; i++)
    {
        PhaseBook pb = sample_phases(1, 1, 0.0, phase_rng, err_rng);
        arma::cx_cube h = sample_channels(st, f, pb.theta, nlos_rng);
        mean_acc += h.slice(0).col(0);
        cov_acc += h.slice(0).col(0) * h.slice(0).col(0).t();
    }
    mean_acc /= n;
    cov_acc /= n;

    // uniform phase wipes the mean; covariance gains the LoS outer product
    arma::cx_vec los = st.los.slice(0).col(0);
    arma::cx_mat expected = los * los.t() + st.scatter_cov(0, 0);
    CHECK(arma::norm(mean_acc) / arma::norm(los) < 0.02);
    CHECK(arma::norm(cov_acc - expected, "fro") / arma::norm(expected, "fro") < 0.05);
}

TEST_CASE("stacking preserves AP blocks")
{
    arma::cx_cube cube(2, 3, 4, arma::fill::randu);
    arma::cx_mat m = stack_aps(cube);
    REQUIRE(m.n_rows == 8);
    REQUIRE(m.n_cols == 3);
    for (arma::uword l = 0; l < 4; l++)
        for (arma::uword k = 0; k < 3; k++)
            for (arma::uword a = 0; a < 2; a++)
                CHECK(m(l * 2 + a, k) == cube(a, k, l));
}

TEST_CASE("degenerate scattering matrices are rejected with the link name")
{
    ScenarioStatistics st = generate_drop(tiny_config(), 8);
    st.scatter_cov(2, 1) = -arma::cx_mat(st.N, st.N, arma::fill::eye);
    CHECK_THROWS_WITH(channel_factors(st), Catch::Matchers::ContainsSubstring("user 2") &&
                                               Catch::Matchers::ContainsSubstring("AP 1"));
}
