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

#include "cfsim/beamforming.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace cfsim;

namespace
{

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.num_aps = 5;
    c.num_users = 4;
    c.antennas_per_ap = 2;
    c.pilot_symbols = 2;
    c.area_side_m = 400.0;
    c.cluster_size = 3;
    return c;
}

struct Fixture
{
    ScenarioStatistics st;
    ChannelFactors f;
    EstimationCache cache;
    PhaseBook pb;
    arma::cx_cube h, est;

    explicit Fixture(std::uint64_t seed, double delta = 0.6)
        : st(generate_drop(small_config(), seed)), f(channel_factors(st)),
          cache(build_estimation_cache(st, Estimator::lmmse, delta))
    {
        Rng pr(seed + 1), er(seed + 2), nr(seed + 3), xr(seed + 4);
        pb = sample_phases(st.K, st.L, delta, pr, er);
        h = sample_channels(st, f, pb.theta, nr);
        arma::cx_cube obs = pilot_observation(st, h, xr);
        est = estimate_channels(st, cache, obs, pb);
    }
};

// dense reference: build each user's cluster system entry by entry
arma::cx_mat reference_centralized(const ScenarioStatistics &st, const EstimationCache &cache,
                                   const arma::cx_cube &est)
{
    const arma::uword LN = st.L * st.N;
    arma::cx_mat hhat = stack_aps(est);
    arma::cx_mat v(LN, st.K, arma::fill::zeros);
    for (arma::uword k = 0; k < st.K; k++)
    {
        arma::uvec rows(st.serving[k].n_elem * st.N);
        for (arma::uword j = 0; j < st.serving[k].n_elem; j++)
            for (arma::uword a = 0; a < st.N; a++)
                rows(j * st.N + a) = st.serving[k](j) * st.N + a;

        arma::cx_mat A(rows.n_elem, rows.n_elem, arma::fill::zeros);
        for (arma::uword i = 0; i < st.K; i++)
        {
            arma::cx_vec hi = hhat.col(i);
            arma::cx_vec hi_sub = hi(rows);
            A += st.data_power_w(i) * (hi_sub * hi_sub.t());
        }
        for (arma::uword j = 0; j < st.serving[k].n_elem; j++)
        {
            arma::uword l = st.serving[k](j);
            A.submat(j * st.N, j * st.N, (j + 1) * st.N - 1, (j + 1) * st.N - 1) +=
                cache.noise_shaping.slice(l) + st.noise_w * arma::cx_mat(st.N, st.N, arma::fill::eye);
        }
        arma::cx_vec b = hhat.col(k);
        arma::cx_vec rhs = std::sqrt(st.data_power_w(k)) * b(rows);
        arma::cx_vec vk = arma::solve(A, rhs);
        for (arma::uword j = 0; j < rows.n_elem; j++)
            v(rows(j), k) = vk(j);
    }
    return v;
}

} // namespace

TEST_CASE("centralized combiner matches the per-user dense reference")
{
    Fixture fx(101);
    arma::cx_mat v = centralized_combiners(fx.st, fx.cache, fx.est);
    arma::cx_mat ref = reference_centralized(fx.st, fx.cache, fx.est);
    CHECK(arma::norm(v - ref, "fro") / arma::norm(ref, "fro") < 1e-10);

    // zero outside the serving cluster
    for (arma::uword k = 0; k < fx.st.K; k++)
    {
        arma::uvec in(fx.st.L, arma::fill::zeros);
        for (arma::uword j = 0; j < fx.st.serving[k].n_elem; j++)
            in(fx.st.serving[k](j)) = 1;
        for (arma::uword l = 0; l < fx.st.L; l++)
            if (!in(l))
                for (arma::uword a = 0; a < fx.st.N; a++)
                    CHECK(v(l * fx.st.N + a, k) == std::complex<double>(0, 0));
    }
}

TEST_CASE("local stages solve each AP's own system")
{
    Fixture fx(103);
    arma::cx_cube stages = local_stages(fx.st, fx.cache, fx.est);
    REQUIRE(stages.n_slices == fx.st.L);
    for (arma::uword l = 0; l < fx.st.L; l++)
    {
        arma::cx_mat hl = fx.est.slice(l);
        arma::cx_mat A = fx.cache.noise_shaping.slice(l) +
                         fx.st.noise_w * arma::cx_mat(fx.st.N, fx.st.N, arma::fill::eye);
        for (arma::uword i = 0; i < fx.st.K; i++)
            A += fx.st.data_power_w(i) * (hl.col(i) * hl.col(i).t());
        arma::cx_mat rhs = hl * arma::diagmat(arma::sqrt(fx.st.data_power_w));
        CHECK(arma::norm(A * stages.slice(l) - rhs, "fro") / arma::norm(rhs, "fro") < 1e-10);
    }
}

TEST_CASE("team coefficients solve the stacked block system")
{
    // random Hermitian PSD contractions as the cross-gain statistics
    const arma::uword K = 5, L = 4;
    arma::arma_rng::set_seed(2024);
    arma::field<arma::cx_mat> pi_f(L);
    for (arma::uword l = 0; l < L; l++)
    {
        arma::cx_mat X(K, K, arma::fill::randn);
        arma::cx_mat P = X * X.t();
        arma::vec ev = arma::eig_sym(P);
        pi_f(l) = P * (0.8 / ev.max());
    }
    std::vector<arma::uvec> serving(K);
    serving[0] = arma::uvec{2};
    serving[1] = arma::uvec{0, 3};
    serving[2] = arma::uvec{0, 1, 2};
    serving[3] = arma::uvec{0, 1, 2, 3};
    serving[4] = arma::uvec{1, 3};

    TeamDiagnostics diag;
    arma::field<arma::cx_mat> coeff = team_coefficients(serving, pi_f, &diag);
    CHECK(diag.max_residual < 1e-12);

    for (arma::uword k = 0; k < K; k++)
    {
        const arma::uvec &aps = serving[k];
        const arma::uword n = aps.n_elem;
        if (n == 1)
        {
            // singleton short-circuit is bitwise exact
            arma::cx_vec c = coeff(aps(0)).col(k);
            for (arma::uword i = 0; i < K; i++)
                CHECK(c(i) == std::complex<double>(i == k ? 1.0 : 0.0, 0.0));
            continue;
        }
        // dense block system: (I + off-diagonal Pi_j) c = stacked e_k
        arma::cx_mat M(n * K, n * K, arma::fill::eye);
        for (arma::uword r = 0; r < n; r++)
            for (arma::uword s = 0; s < n; s++)
                if (r != s)
                    M.submat(r * K, s * K, (r + 1) * K - 1, (s + 1) * K - 1) = pi_f(aps(s));
        arma::cx_vec rhs(n * K, arma::fill::zeros);
        for (arma::uword r = 0; r < n; r++)
            rhs(r * K + k) = 1.0;
        arma::cx_vec sol = arma::solve(M, rhs);
        for (arma::uword r = 0; r < n; r++)
        {
            arma::cx_vec got = coeff(aps(r)).col(k);
            arma::cx_vec want = sol.subvec(r * K, (r + 1) * K - 1);
            CHECK(arma::norm(got - want) < 1e-10 * arma::norm(want));
        }
        // APs outside the cluster hold zero coefficients
        for (arma::uword l = 0; l < L; l++)
            if (!arma::any(aps == l))
                CHECK(arma::norm(coeff(l).col(k)) == 0.0);
    }
}

TEST_CASE("non-contractive statistics are rejected")
{
    const arma::uword K = 2, L = 2;
    arma::field<arma::cx_mat> pi_f(L);
    pi_f(0) = 1.5 * arma::cx_mat(K, K, arma::fill::eye); // spectral radius > 1
    pi_f(1) = 0.5 * arma::cx_mat(K, K, arma::fill::eye);
    std::vector<arma::uvec> serving(K, arma::uvec{0, 1});
    CHECK_THROWS_AS(team_coefficients(serving, pi_f), numeric_error);
}

TEST_CASE("team statistics are Hermitian contractions on realistic data")
{
    Fixture fx(107);
    Rng inner(55);
    arma::field<arma::cx_mat> pi_f =
        team_statistics(fx.st, fx.cache, fx.f, fx.pb, 40, inner, false);
    REQUIRE(pi_f.n_elem == fx.st.L);
    for (arma::uword l = 0; l < fx.st.L; l++)
    {
        CHECK(arma::norm(pi_f(l) - pi_f(l).t(), "fro") < 1e-12 * arma::norm(pi_f(l), "fro"));
        arma::vec ev = arma::eig_sym(pi_f(l));
        CHECK(ev.min() > -1e-10);
        CHECK(ev.max() < 1.0);
    }
}

TEST_CASE("distributed combiner stacks local stages mixed by the coefficients")
{
    Fixture fx(109);
    arma::cx_cube stages = local_stages(fx.st, fx.cache, fx.est);
    Rng inner(77);
    arma::field<arma::cx_mat> pi_f =
        team_statistics(fx.st, fx.cache, fx.f, fx.pb, 30, inner, false);
    arma::field<arma::cx_mat> coeff = team_coefficients(fx.st.serving, pi_f);
    arma::cx_mat v = distributed_combiners(fx.st, stages, coeff);
    REQUIRE(v.n_rows == fx.st.L * fx.st.N);
    REQUIRE(v.n_cols == fx.st.K);
    for (arma::uword l = 0; l < fx.st.L; l++)
    {
        arma::cx_mat blk = stages.slice(l) * coeff(l);
        CHECK(arma::norm(v.rows(l * fx.st.N, (l + 1) * fx.st.N - 1) - blk, "fro") < 1e-14);
    }
}

TEST_CASE("single-AP distributed equals single-AP centralized")
{
    ScenarioConfig c = small_config();
    c.num_aps = 1;
    c.cluster_size = 0;
    ScenarioStatistics st = generate_drop(c, 211);
    ChannelFactors f = channel_factors(st);
    EstimationCache cache = build_estimation_cache(st, Estimator::lmmse, 0.5);
    Rng pr(1), er(2), nr(3), xr(4);
    PhaseBook pb = sample_phases(st.K, st.L, 0.5, pr, er);
    arma::cx_cube h = sample_channels(st, f, pb.theta, nr);
    arma::cx_cube obs = pilot_observation(st, h, xr);
    arma::cx_cube est = estimate_channels(st, cache, obs, pb);

    arma::cx_mat vc = centralized_combiners(st, cache, est);
    arma::cx_cube stages = local_stages(st, cache, est);
    Rng inner(9);
    arma::field<arma::cx_mat> pi_f = team_statistics(st, cache, f, pb, 5, inner, false);
    arma::field<arma::cx_mat> coeff = team_coefficients(st.serving, pi_f);
    arma::cx_mat vd = distributed_combiners(st, stages, coeff);
    CHECK(arma::norm(vc - vd, "fro") / arma::norm(vc, "fro") < 1e-10);
}

TEST_CASE("more inner samples reduce the statistics noise")
{
    Fixture fx(113);
    // reference with a large budget
    Rng r0(1000);
    arma::field<arma::cx_mat> ref = team_statistics(fx.st, fx.cache, fx.f, fx.pb, 4000, r0, false);

    auto err = [&](std::uint64_t samples, std::uint64_t seed) {
        Rng r(seed);
        arma::field<arma::cx_mat> p = team_statistics(fx.st, fx.cache, fx.f, fx.pb, samples, r, false);
        double e = 0;
        for (arma::uword l = 0; l < fx.st.L; l++)
            e += std::pow(arma::norm(p(l) - ref(l), "fro"), 2);
        return e;
    };
    // averaged over a few replicates to keep the comparison stable
    double small = 0, large = 0;
    for (std::uint64_t s = 0; s < 6; s++)
    {
        small += err(10, 2000 + s);
        large += err(160, 3000 + s);
    }
    CHECK(large < small);
}
