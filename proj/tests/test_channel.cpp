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

#include "risbc/channel.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace risbc;
using namespace risbc::channel;
using Catch::Approx;
using cd = std::complex<double>;

namespace
{

const double kPi = std::numbers::pi;

// Independent steering entry: exp(sign * j pi m trig(angle)) / sqrt(n).
cd ref_entry(int m, int n, double angle, Steering s)
{
    double ph = 0.0;
    switch (s)
    {
    case Steering::arrival_cos_neg:
        ph = -kPi * m * std::cos(angle);
        break;
    case Steering::arrival_cos_pos:
        ph = kPi * m * std::cos(angle);
        break;
    case Steering::departure_sin_neg:
        ph = -kPi * m * std::sin(angle);
        break;
    }
    return std::polar(1.0 / std::sqrt(static_cast<double>(n)), ph);
}

PathSet<double> random_paths(Rng &rng, int l, int max_tap)
{
    CVector<double> g(l);
    RVector<double> a(l), d(l), p(l);
    std::vector<int> taps;
    for (int i = 0; i < l; ++i)
    {
        g(i) = rng.circular_normal(1.0);
        a(i) = rng.uniform(0.0, kPi);
        d(i) = rng.uniform(-kPi / 2, kPi / 2);
        taps.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_tap) + 1)));
        p(i) = 1.0 / l;
    }
    return PathSet<double>(g, a, d, taps, p);
}

} // namespace

TEST_CASE("steering vector examples")
{
    const CVector<double> v = steering_vector<double>({4}, kPi / 2, Steering::arrival_cos_neg);
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(v(m) - cd(0.5, 0.0)) < 1e-15);

    const CVector<double> b = steering_vector<double>({2}, 0.0, Steering::departure_sin_neg);
    CHECK(std::abs(b(0) - cd(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(b(1) - cd(1 / std::sqrt(2.0), 0)) < 1e-15);

    const CVector<double> h = steering_vector<double>({4}, kPi / 3, Steering::arrival_cos_pos);
    const cd expect[] = {{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0, -0.5}};
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(h(m) - expect[m]) < 1e-12);
}

TEST_CASE("steering vector rejects non-finite angles")
{
    CHECK_THROWS_AS(steering_vector<double>({4}, std::nan(""), Steering::arrival_cos_neg), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector<double>({4}, INFINITY, Steering::departure_sin_neg), std::invalid_argument);
}

TEST_CASE("steering vectors have unit norm and match the closed form")
{
    Rng rng(7);
    for (int t = 0; t < 200; ++t)
    {
        const int n = 1 + static_cast<int>(rng.uniform_index(64));
        const double ang = rng.uniform(0.0, kPi);
        for (Steering s : {Steering::arrival_cos_neg, Steering::arrival_cos_pos, Steering::departure_sin_neg})
        {
            const CVector<double> v = steering_vector<double>({n}, ang, s);
            REQUIRE(v.size() == n);
            CHECK(std::abs(v.squaredNorm() - 1.0) < 1e-12);
            for (int m = 0; m < n; ++m)
                CHECK(std::abs(v(m) - ref_entry(m, n, ang, s)) < 1e-12);
        }
    }
}

TEST_CASE("element spacing scales the phase progression")
{
    const CVector<double> v = steering_vector<double>({3, 0.25}, 0.0, Steering::arrival_cos_neg);
    CHECK(std::abs(std::arg(v(1)) - (-kPi / 2)) < 1e-12);
    CHECK_THROWS_AS((ArrayGeometry{0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ArrayGeometry{4, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("LoS-only channel has a single unit path")
{
    ChannelConfig c;
    c.num_paths = 1;
    c.k_factor_db = INFINITY;
    const auto p = sample_paths(c, 3);
    REQUIRE(p.size() == 1);
    CHECK(std::abs(p.gains()(0)) == Approx(1.0).epsilon(1e-14));
    CHECK(p.mean_powers()(0) == 1.0);
}

TEST_CASE("K-factor power split matches the construction")
{
    ChannelConfig c;
    c.num_paths = 4;
    c.k_factor_db = 10.0;
    c.delay_spread_taps = 8;
    const auto mp = c.mean_powers();
    CHECK(mp[0] == Approx(10.0 / 11.0).epsilon(1e-14));
    for (int i = 1; i < 4; ++i)
        CHECK(mp[static_cast<std::size_t>(i)] == Approx(1.0 / 33.0).epsilon(1e-14));

    Rng rng(11);
    std::vector<double> acc(4, 0.0);
    const int n = 100000;
    for (int t = 0; t < n; ++t)
    {
        const auto p = sample_paths(c, rng);
        CHECK(std::abs(p.mean_powers().sum() - 1.0) <= 1e-12);
        for (int i = 0; i < 4; ++i)
            acc[static_cast<std::size_t>(i)] += std::norm(p.gains()(i));
    }
    CHECK(acc[0] / n == Approx(10.0 / 11.0).epsilon(1e-10)); // deterministic magnitude
    for (int i = 1; i < 4; ++i)
        CHECK(acc[static_cast<std::size_t>(i)] / n == Approx(1.0 / 33.0).epsilon(0.01));
}

TEST_CASE("path sampling is deterministic per seed")
{
    ChannelConfig c;
    c.num_paths = 5;
    c.delay_spread_taps = 8;
    const auto a = sample_paths(c, 42);
    const auto b = sample_paths(c, 42);
    const auto d = sample_paths(c, 43);
    CHECK(a == b);
    CHECK_FALSE(a == d);
    for (int t : a.tap_indices())
    {
        CHECK(t >= 0);
        CHECK(t <= 8);
    }
    for (int i = 0; i < 5; ++i)
    {
        CHECK(a.arrival_angles()(i) >= 0.0);
        CHECK(a.arrival_angles()(i) <= kPi);
    }
}

TEST_CASE("channel configuration validation")
{
    ChannelConfig c;
    c.num_paths = 1;
    c.k_factor_db = 10.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    ChannelConfig d;
    d.num_paths = 3;
    d.delay_spread_taps = 9;
    CHECK_THROWS_AS(d.validate(8), ConfigError);
    d.delay_spread_taps = 8;
    CHECK_NOTHROW(d.validate(8));

    ChannelConfig e;
    e.num_paths = 2;
    e.power_profile = PowerProfile::custom;
    e.custom_powers = {0.5, 0.4};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e.custom_powers = {0.7, 0.3};
    CHECK_NOTHROW(e.validate());
    const auto p = sample_paths(e, 1);
    CHECK(p.mean_powers()(0) == Approx(0.7));

    ChannelConfig f;
    f.num_paths = 2;
    f.arrival = AngleDistribution::fixed_list({0.1});
    CHECK_THROWS_AS(f.validate(), ConfigError);
    f.arrival = AngleDistribution::fixed_list({0.1, 0.2});
    const auto q = sample_paths(f, 1);
    CHECK(q.arrival_angles()(1) == 0.2);
}

TEST_CASE("PathSet invariants are enforced")
{
    CVector<double> g(2);
    g << cd(1, 0), cd(0, 1);
    RVector<double> a(2), d(2), p(2), bad(2);
    a << 0.1, 0.2;
    d << 0.3, 0.4;
    p << 0.5, 0.5;
    bad << 0.5, 0.6;
    CHECK_NOTHROW(PathSet<double>(g, a, d, {0, 1}, p));
    CHECK_THROWS_AS(PathSet<double>(g, a, d, {0, 1}, bad), std::invalid_argument);
    CHECK_THROWS_AS(PathSet<double>(g, a, d, {0}, p), std::invalid_argument);
    CHECK_THROWS_AS(PathSet<double>(g, a, d, {0, -1}, p), std::invalid_argument);
}

TEST_CASE("frequency gain examples")
{
    const cd alpha(0.3, -1.2);
    for (int k = 0; k < 64; ++k)
    {
        CHECK(freq_gain<double>(alpha, 0, k, 64) == alpha);
        for (int tap = 0; tap < 9; ++tap)
            CHECK(std::abs(std::abs(freq_gain<double>(alpha, tap, k, 64)) - std::abs(alpha)) < 1e-14);
    }
    CHECK(std::abs(freq_gain<double>(cd(1, 0), 1, 32, 64) - cd(-1, 0)) < 1e-15);
    CHECK_THROWS_AS(freq_gain<double>(alpha, 1, 64, 64), std::invalid_argument);
    CHECK_THROWS_AS(freq_gain<double>(alpha, 1, -1, 64), std::invalid_argument);
}

TEST_CASE("frequency channel equals the DFT of the tapped time-domain channel")
{
    Rng rng(2024);
    for (int inst = 0; inst < 50; ++inst)
    {
        const int ntx = 1 + static_cast<int>(rng.uniform_index(8));
        const int nrx = 1 + static_cast<int>(rng.uniform_index(8));
        const int l = 1 + static_cast<int>(rng.uniform_index(4));
        const int nc = 16;
        const auto paths = random_paths(rng, l, 6);
        const ArraySide tx = bs_side(ntx);
        const ArraySide rx = ris_incident_side(nrx);

        // Time-domain taps with a rectangular pulse: path l occupies sample n_l.
        std::vector<CMatrix<double>> taps(nc, CMatrix<double>::Zero(nrx, ntx));
        for (int i = 0; i < l; ++i)
        {
            CVector<double> r(nrx), t(ntx);
            for (int m = 0; m < nrx; ++m)
                r(m) = ref_entry(m, nrx, paths.arrival_angles()(i), rx.steering);
            for (int m = 0; m < ntx; ++m)
                t(m) = ref_entry(m, ntx, paths.departure_angles()(i), tx.steering);
            taps[static_cast<std::size_t>(paths.tap_indices()[static_cast<std::size_t>(i)])] +=
                std::sqrt(double(ntx * nrx)) * paths.gains()(i) * r * t.adjoint();
        }
        const auto freq = frequency_channel(paths, tx, rx, nc);
        REQUIRE(freq.num_subcarriers() == nc);
        for (int k = 0; k < nc; ++k)
        {
            CMatrix<double> dft = CMatrix<double>::Zero(nrx, ntx);
            for (int n = 0; n < nc; ++n)
                dft += taps[static_cast<std::size_t>(n)] * std::polar(1.0, -2.0 * kPi * k * n / nc);
            CHECK((freq.per_subcarrier[static_cast<std::size_t>(k)] - dft).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((assemble_channel(paths, tx, rx, k, nc) - dft).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("factored and summed channel forms agree")
{
    Rng rng(5);
    for (int inst = 0; inst < 20; ++inst)
    {
        const auto paths = random_paths(rng, 3, 8);
        const int nc = 64;
        const int k = static_cast<int>(rng.uniform_index(nc));
        const auto f = factor_channel(paths, bs_side(8), ris_incident_side(16), k, nc);
        const CMatrix<double> s = assemble_channel(paths, bs_side(8), ris_incident_side(16), k, nc);
        CHECK((f.matrix() - s).cwiseAbs().maxCoeff() < 1e-12 * s.cwiseAbs().maxCoeff());
    }
    const auto paths = random_paths(rng, 3, 8);
    const auto f0 = factor_channel(paths, bs_side(4), ris_incident_side(4), 0, 64);
    for (int i = 0; i < 3; ++i)
        CHECK(f0.phase_ramp(i) == cd(1, 0));
    CHECK_THROWS_AS(assemble_channel(paths, bs_side(4), ris_incident_side(4), 0, 4), std::invalid_argument);
}

TEST_CASE("single unit path gives a rank-one channel")
{
    CVector<double> g(1);
    g << cd(1, 0);
    RVector<double> a(1), d(1), p(1);
    a << 1.1;
    d << 0.2;
    p << 1.0;
    const PathSet<double> ps(g, a, d, {3}, p);
    const CMatrix<double> h = assemble_channel(ps, bs_side(6), ris_incident_side(5), 7, 64);
    CHECK(h.norm() == Approx(std::sqrt(30.0)).epsilon(1e-12));
    Eigen::JacobiSVD<CMatrix<double>> svd(h);
    CHECK(svd.singularValues()(1) < 1e-12);
}

TEST_CASE("path loss")
{
    CHECK(path_loss_linear(1.0, 2.0) == Approx(1e-3).epsilon(1e-12));
    CHECK(path_loss_linear(10.0, 2.0) == Approx(1e-5).epsilon(1e-12));
    CHECK(path_loss_linear(100.0, 3.5) == Approx(1e-10).epsilon(1e-12));
    CHECK_THROWS_AS(path_loss_linear(0.5, 2.0), std::invalid_argument);
}
