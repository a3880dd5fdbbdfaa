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

#include "cfsim/config.hpp"
#include "cfsim/common.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace cfsim;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("defaults describe the reference deployment")
{
    ExperimentPlan p;
    CHECK(p.scenario.num_aps == 100);
    CHECK(p.scenario.num_users == 40);
    CHECK(p.scenario.antennas_per_ap == 4);
    CHECK(p.scenario.pilot_symbols == 5);
    CHECK(p.scenario.coherence_symbols == 200);
    CHECK(p.scenario.area_side_m == 1000.0);
    CHECK(p.scenario.max_power_w == 0.1);
    CHECK(p.scenario.rician_kappa == 5.0);
    CHECK(p.delta_deg == std::vector<double>{0.0, 15.0, 30.0, 45.0, 90.0, 180.0});
    CHECK(p.modes.size() == 2);
    REQUIRE_NOTHROW(validate_plan(p));
}

TEST_CASE("canonical text round-trips to an identical plan")
{
    PlanBuilder b;
    b.set("scenario.num_aps", "12");
    b.set("scenario.cluster_size", "all");
    b.set("experiment.delta_deg", "0, 45, 90");
    b.set("experiment.kappa", "1,10");
    b.set("experiment.modes", "distributed:phase-blind, centralized:lmmse");
    b.set("experiment.overhead_prelog", "true");
    b.set("debug.diagnostics_log", "/tmp/diag.txt");

    std::string text = format_plan(b.plan());
    PlanBuilder b2;
    b2.load_text(text, "echo");
    CHECK(format_plan(b2.plan()) == text);
    CHECK(plan_hash(b2.plan()) == plan_hash(b.plan()));
}

TEST_CASE("hash separates different plans")
{
    PlanBuilder a, b;
    b.set("experiment.trials", "999");
    CHECK(plan_hash(a.plan()) != plan_hash(b.plan()));
}

TEST_CASE("mode names parse both ways")
{
    for (const char *name : {"centralized:lmmse", "distributed:lmmse", "centralized:perfect-phase",
                             "distributed:phase-blind"})
        CHECK(mode_name(parse_mode(name)) == name);
    CHECK_THROWS_AS(parse_mode("central:lmmse"), validation_error);
    CHECK_THROWS_AS(parse_mode("centralized"), validation_error);
    CHECK_THROWS_AS(parse_mode("centralized:mmse"), validation_error);
}

TEST_CASE("file syntax errors carry origin and line")
{
    PlanBuilder b;
    CHECK_THROWS_WITH(b.load_text("[scenario]\nnum_aps 4\n", "bad.ini"),
                      ContainsSubstring("bad.ini:2"));
    CHECK_THROWS_WITH(b.load_text("[nosuch]\n", "f"), ContainsSubstring("f:1"));
    CHECK_THROWS_WITH(b.load_text("num_aps = 4\n", "f"),
                      ContainsSubstring("f:1")); // key before any section
}

TEST_CASE("comments and blank lines are ignored")
{
    PlanBuilder b;
    REQUIRE_NOTHROW(b.load_text("# top comment\n\n[scenario]\n# inner\nnum_aps = 7\n", "f"));
    CHECK(b.plan().scenario.num_aps == 7);
    CHECK(b.is_set("scenario.num_aps"));
    CHECK_FALSE(b.is_set("scenario.num_users"));
}

TEST_CASE("unknown keys are rejected by name")
{
    PlanBuilder b;
    CHECK_THROWS_WITH(b.set("scenario.bogus", "1"), ContainsSubstring("bogus"));
    CHECK_THROWS_WITH(b.set("experiment.bogus", "1"), ContainsSubstring("bogus"));
    CHECK_THROWS_WITH(b.set("nosection.num_aps", "1"), ContainsSubstring("nosection"));
}

TEST_CASE("bad values name the offending key")
{
    PlanBuilder b;
    CHECK_THROWS_WITH(b.set("scenario.num_aps", "zero"), ContainsSubstring("num_aps"));
    CHECK_THROWS_WITH(b.set("experiment.overhead_prelog", "maybe"),
                      ContainsSubstring("overhead_prelog"));
    CHECK_THROWS_WITH(b.set("scenario.pilot_assignment", "random"),
                      ContainsSubstring("pilot_assignment"));
    CHECK_THROWS_WITH(b.set("experiment.pi_estimate", "half"), ContainsSubstring("pi_estimate"));
}

TEST_CASE("validation names the violated rule")
{
    PlanBuilder b;
    b.set("scenario.pilot_symbols", "300"); // more than coherence_symbols
    CHECK_THROWS_WITH(validate_plan(b.plan()), ContainsSubstring("pilot_symbols"));

    PlanBuilder c;
    c.set("experiment.delta_deg", "0,200");
    CHECK_THROWS_WITH(validate_plan(c.plan()), ContainsSubstring("delta_deg"));

    PlanBuilder d;
    d.set("experiment.delta_deg", "30,30");
    CHECK_THROWS_WITH(validate_plan(d.plan()), ContainsSubstring("delta_deg"));

    PlanBuilder e;
    e.set("experiment.trials", "1");
    CHECK_THROWS_WITH(validate_plan(e.plan()), ContainsSubstring("trials"));

    PlanBuilder f;
    f.set("scenario.power_exponent", "3");
    CHECK_THROWS_WITH(validate_plan(f.plan()), ContainsSubstring("power_exponent"));

    PlanBuilder g;
    g.set("experiment.modes", "centralized:lmmse, centralized:lmmse");
    CHECK_THROWS_WITH(validate_plan(g.plan()), ContainsSubstring("modes"));
}

TEST_CASE("kappa grid falls back to the scenario value")
{
    PlanBuilder b;
    CHECK(effective_kappa_grid(b.plan()) == std::vector<double>{5.0});
    b.set("scenario.rician_kappa", "2.5");
    CHECK(effective_kappa_grid(b.plan()) == std::vector<double>{2.5});
    b.set("experiment.kappa", "0,1,10");
    CHECK(effective_kappa_grid(b.plan()) == std::vector<double>{0.0, 1.0, 10.0});
}

TEST_CASE("cluster size accepts the word all")
{
    PlanBuilder b;
    b.set("scenario.cluster_size", "all");
    CHECK(b.plan().scenario.cluster_size == 0);
    b.set("scenario.cluster_size", "8");
    CHECK(b.plan().scenario.cluster_size == 8);
    std::string text = format_plan(b.plan());
    CHECK_THAT(text, ContainsSubstring("cluster_size = 8"));
}

TEST_CASE("format_double is shortest and exact")
{
    for (double x : {0.1, 1.0 / 3.0, 5.0e9, -0.0, 123456789.123456789, 1e-300})
    {
        std::string s = format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(format_double(5.0) == "5");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("later sources override earlier ones")
{
    PlanBuilder b;
    b.load_text("[scenario]\nnum_aps = 9\n", "first");
    b.load_text("[scenario]\nnum_aps = 11\n", "second");
    CHECK(b.plan().scenario.num_aps == 11);
    b.set("scenario.num_aps", "13");
    CHECK(b.plan().scenario.num_aps == 13);
}
