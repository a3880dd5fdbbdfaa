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

#ifndef CFSIM_RNG_HPP
#define CFSIM_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace cfsim
{

// Counter-based stream derivation: every consumer of randomness gets its own
// generator seeded by (master, drop, trial, purpose). Streams are therefore
// independent of scheduling order, which is what makes multi-threaded runs
// bit-reproducible. The variate transforms are implemented here instead of
// relying on std::*_distribution, whose output differs between standard
// library implementations.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    std::uint64_t raw() { return gen(); }

    // uniform on [0, 1), 53-bit resolution
    double uniform01()
    {
        return double(gen() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b)
    {
        return a + (b - a) * uniform01();
    }

    // uniform on [-mag, mag]
    double symmetric(double mag)
    {
        return mag * (2.0 * uniform01() - 1.0);
    }

    // standard normal, Box-Muller without caching (keeps the stream position
    // a pure function of the call count)
    double normal();

    // circularly symmetric complex normal, unit variance
    std::complex<double> cnormal();

  private:
    std::mt19937_64 gen;
};

// Purpose tags for substreams. Values are part of the reproducibility
// contract; do not renumber.
enum class Stream : std::uint64_t
{
    scenario = 1,    // drop geometry, shadow fading
    phase = 2,       // true LoS phases
    phase_error = 3, // tracking error
    nlos = 4,        // scattered channel component
    pilot_noise = 5, // additive noise on the pilot block
    team_inner = 6,  // inner draws for the team statistics
    virtual_mc = 7   // virtual-model sampling used by diagnostics
};

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t tag);

Rng make_stream(std::uint64_t master, std::uint64_t drop, std::uint64_t trial, Stream purpose);

} // namespace cfsim

#endif
