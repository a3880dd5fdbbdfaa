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

#ifndef CFSIM_VERIFY_HPP
#define CFSIM_VERIFY_HPP

#include "cfsim/harness.hpp"

#include <string>
#include <vector>

namespace cfsim
{

struct CheckResult
{
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::string detail;
};

struct VerifyOptions
{
    // deliberately corrupts the covariance reference formula; the
    // error-covariance check must then fail. Used to prove the checks bite.
    bool inject_sign_error = false;
};

// Quick end-to-end self-checks on randomized small scenarios. Each entry is
// logged as it completes; overall success = every check passed.
std::vector<CheckResult> run_verification(const LogFn &log = {},
                                          const VerifyOptions &opts = {});

} // namespace cfsim

#endif
