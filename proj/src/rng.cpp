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

#include "cfsim/rng.hpp"
#include "cfsim/common.hpp"

#include <cmath>

namespace cfsim
{

double Rng::normal()
{
    // guard against log(0); uniform01 () can return exactly 0
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

std::complex<double> Rng::cnormal()
{
    double re = normal();
    double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
}

static std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t tag)
{
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ tag);
    return s;
}

Rng make_stream(std::uint64_t master, std::uint64_t drop, std::uint64_t trial, Stream purpose)
{
    return Rng(mix_seed(master, drop, trial, static_cast<std::uint64_t>(purpose)));
}

} // namespace cfsim
