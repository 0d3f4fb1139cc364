// SPDX-License-Identifier: Apache-2.0
//
// risbc - RIS broad-coverage pattern synthesis and downlink rate analysis
// Copyright (C) 2026 The risbc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISBC_RNG_HPP
#define RISBC_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace risbc
{

// splitmix64 finalizer, used to derive independent substream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632BE59BD9B4E019ull));
}

// Seedable generator with platform-independent variates.
//
// std::mt19937_64 output is fixed by the standard; the distribution classes
// of <random> are not, so every variate below is derived from the raw engine
// output in a documented way:
//   uniform()          one engine draw, top 53 bits scaled to [0, 1)
//   uniform_index(n)   one uniform() draw, floor(u * n)
//   normal()           two uniform() draws, Box-Muller cosine branch
//   circular_normal(v) two uniform() draws, Box-Muller both branches
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform over {0, ..., n - 1}.
    std::uint64_t uniform_index(std::uint64_t n)
    {
        auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    double normal()
    {
        auto [r, t] = polar_pair();
        return r * std::cos(t);
    }

    // Circularly-symmetric complex Gaussian with E{|z|^2} = variance.
    std::complex<double> circular_normal(double variance = 1.0)
    {
        auto [r, t] = polar_pair();
        const double s = std::sqrt(variance / 2.0);
        return {s * r * std::cos(t), s * r * std::sin(t)};
    }

    // Unit-modulus complex number with uniform phase.
    std::complex<double> unit_phasor() { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

  private:
    std::pair<double, double> polar_pair()
    {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return {std::sqrt(-2.0 * std::log(u1)), 2.0 * std::numbers::pi * u2};
    }

    std::mt19937_64 engine_;
};

} // namespace risbc

#endif
