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

#include "cfsim.h"

#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <string>
#include <vector>

using Catch::Matchers::ContainsSubstring;

namespace
{
void set_tiny(cfsim_plan *p)
{
    REQUIRE(cfsim_plan_set(p, "scenario.num_aps", "5") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "scenario.num_users", "3") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "scenario.antennas_per_ap", "2") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "scenario.pilot_symbols", "2") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "experiment.delta_deg", "0,90") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "experiment.modes", "centralized:lmmse") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "experiment.trials", "6") == CFSIM_OK);
    REQUIRE(cfsim_plan_set(p, "experiment.inner_samples", "4") == CFSIM_OK);
}
} // namespace

TEST_CASE("version and status names are stable strings")
{
    CHECK(std::string(cfsim_version()) == "0.1.0");
    CHECK(std::string(cfsim_status_name(CFSIM_OK)) == "ok");
    CHECK(std::string(cfsim_status_name(CFSIM_ERR_INVALID)) == "invalid");
    CHECK(std::string(cfsim_status_name(CFSIM_ERR_RUNTIME)) == "runtime");
    CHECK(std::string(cfsim_status_name(CFSIM_ERR_VERIFY)) == "verify");
}

TEST_CASE("null arguments are reported, not crashed on")
{
    CHECK(cfsim_plan_set(nullptr, "a", "b") == CFSIM_ERR_INVALID);
    CHECK(cfsim_plan_load_file(nullptr, "x") == CFSIM_ERR_INVALID);
    CHECK(cfsim_plan_validate(nullptr) == CFSIM_ERR_INVALID);
    CHECK(cfsim_execute(nullptr, nullptr, nullptr, nullptr, nullptr) == CFSIM_ERR_INVALID);
    CHECK_THAT(cfsim_last_error(), ContainsSubstring("null"));
    cfsim_plan_free(nullptr); // must be a no-op
    cfsim_result_free(nullptr);
}

TEST_CASE("errors carry the offending key")
{
    cfsim_plan *p = cfsim_plan_new();
    REQUIRE(p);
    CHECK(cfsim_plan_set(p, "scenario.bogus", "1") == CFSIM_ERR_INVALID);
    CHECK_THAT(cfsim_last_error(), ContainsSubstring("bogus"));
    CHECK(cfsim_plan_set(p, "experiment.trials", "1") == CFSIM_OK);
    CHECK(cfsim_plan_validate(p) == CFSIM_ERR_INVALID);
    CHECK_THAT(cfsim_last_error(), ContainsSubstring("trials"));
    CHECK(cfsim_plan_load_file(p, "/nonexistent/path.ini") == CFSIM_ERR_INVALID);
    CHECK_THAT(cfsim_last_error(), ContainsSubstring("path.ini"));
    cfsim_plan_free(p);
}

TEST_CASE("is_set tracks explicit keys only")
{
    cfsim_plan *p = cfsim_plan_new();
    CHECK(cfsim_plan_is_set(p, "experiment.drops") == 0);
    cfsim_plan_set(p, "experiment.drops", "2");
    CHECK(cfsim_plan_is_set(p, "experiment.drops") == 1);
    cfsim_plan_free(p);
}

TEST_CASE("format reports the needed buffer size")
{
    cfsim_plan *p = cfsim_plan_new();
    size_t needed = 0;
    REQUIRE(cfsim_plan_format(p, nullptr, 0, &needed) == CFSIM_OK);
    REQUIRE(needed > 100);

    std::vector<char> buf(needed);
    REQUIRE(cfsim_plan_format(p, buf.data(), buf.size(), nullptr) == CFSIM_OK);
    CHECK(std::strlen(buf.data()) == needed - 1);
    CHECK_THAT(std::string(buf.data()), ContainsSubstring("[scenario]"));

    // short buffers are refused, size is still reported
    std::vector<char> tiny(8);
    size_t needed2 = 0;
    CHECK(cfsim_plan_format(p, tiny.data(), tiny.size(), &needed2) == CFSIM_ERR_INVALID);
    CHECK(needed2 == needed);
    cfsim_plan_free(p);
}

TEST_CASE("execute produces one result cell per grid point")
{
    cfsim_plan *p = cfsim_plan_new();
    set_tiny(p);
    REQUIRE(cfsim_plan_validate(p) == CFSIM_OK);

    cfsim_result *r = nullptr;
    REQUIRE(cfsim_execute(p, nullptr, nullptr, nullptr, &r) == CFSIM_OK);
    REQUIRE(r);
    REQUIRE(cfsim_result_num_cells(r) == 2);

    char mode[64];
    double delta = -1, kappa = -1;
    size_t drops = 0, users = 0;
    REQUIRE(cfsim_result_cell_info(r, 0, mode, sizeof(mode), &delta, &kappa, &drops, &users) ==
            CFSIM_OK);
    CHECK(std::string(mode) == "centralized:lmmse");
    CHECK(delta == 0.0);
    CHECK(kappa == 5.0);
    CHECK(users == 3);
    CHECK(drops == 1);

    double mu = 0, eu = 0, mo = 0, eo = 0;
    REQUIRE(cfsim_result_cell_mean(r, 0, &mu, &eu, &mo, &eo) == CFSIM_OK);
    CHECK(mu > 0.0);
    CHECK(mo >= mu); // genie bound dominates
    CHECK(eu > 0.0);

    double uatf = 0, uatf_err = 0, oer = 0, oer_err = 0;
    for (size_t u = 0; u < users; u++)
    {
        REQUIRE(cfsim_result_user_se(r, 0, 0, u, &uatf, &uatf_err, &oer, &oer_err) == CFSIM_OK);
        CHECK(uatf > 0.0);
        CHECK(oer >= uatf);
        CHECK(uatf_err > 0.0);
    }

    // out of range indices fail cleanly
    CHECK(cfsim_result_cell_mean(r, 9, &mu, &eu, &mo, &eo) == CFSIM_ERR_INVALID);
    CHECK(cfsim_result_user_se(r, 0, 0, 99, &uatf, &uatf_err, &oer, &oer_err) ==
          CFSIM_ERR_INVALID);

    cfsim_result_free(r);
    cfsim_plan_free(p);
}

TEST_CASE("execute rejects invalid plans with a named rule")
{
    cfsim_plan *p = cfsim_plan_new();
    cfsim_plan_set(p, "scenario.pilot_symbols", "500");
    cfsim_result *r = nullptr;
    CHECK(cfsim_execute(p, nullptr, nullptr, nullptr, &r) == CFSIM_ERR_INVALID);
    CHECK(r == nullptr);
    CHECK_THAT(cfsim_last_error(), ContainsSubstring("pilot_symbols"));
    cfsim_plan_free(p);
}

TEST_CASE("log callback receives progress lines")
{
    cfsim_plan *p = cfsim_plan_new();
    set_tiny(p);
    cfsim_plan_set(p, "experiment.delta_deg", "45");

    static std::vector<std::string> lines;
    lines.clear();
    auto log = [](const char *line, void *) { lines.push_back(line); };

    cfsim_result *r = nullptr;
    REQUIRE(cfsim_execute(p, nullptr, log, nullptr, &r) == CFSIM_OK);
    bool saw_cell = false;
    for (const std::string &s : lines)
        if (s.find("cell ") != std::string::npos)
            saw_cell = true;
    CHECK(saw_cell);
    cfsim_result_free(r);
    cfsim_plan_free(p);
}

TEST_CASE("self checks pass through the C interface")
{
    int failed = -1;
    CHECK(cfsim_verify(nullptr, nullptr, &failed) == CFSIM_OK);
    CHECK(failed == 0);
}
