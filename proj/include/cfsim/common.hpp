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

#ifndef CFSIM_COMMON_HPP
#define CFSIM_COMMON_HPP

#define ARMA_DONT_USE_WRAPPER
#include <armadillo>

#include <complex>
#include <stdexcept>
#include <string>

namespace cfsim
{

constexpr double pi = 3.141592653589793238462643383279502884;

// Thrown for bad configuration or bad arguments; maps to the INVALID status in the C API.
class validation_error : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical step fails (singular system, indefinite covariance, ...);
// maps to the RUNTIME status in the C API.
class numeric_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

const char *version_string(); // "major.minor.patch"

} // namespace cfsim

#endif
