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

#include "risbc/manifold.hpp"

#include <catch_amalgamated.hpp>

using namespace risbc;
using namespace risbc::manifold;
using cd = std::complex<double>;

namespace
{

CVector<double> random_complex(Rng &rng, int n)
{
    CVector<double> v(n);
    for (int i = 0; i < n; ++i)
        v(i) = rng.circular_normal(1.0);
    return v;
}

// J = sum_j (|u_j^H theta|^2 - t_j)^2 and its gradient with respect to conj(theta).
struct QuarticCost
{
    CMatrix<double> u; // rows u_j^H
    RVector<double> t;

    double operator()(const CVector<double> &th) const
    {
        return ((u * th).cwiseAbs2() - t).squaredNorm();
    }
    CVector<double> grad(const CVector<double> &th) const
    {
        const CVector<double> s = u * th;
        const RVector<double> r = s.cwiseAbs2() - t;
        return 2.0 * u.adjoint() * (r.cast<cd>().cwiseProduct(s));
    }
};

} // namespace

TEST_CASE("unit-modulus vector validation")
{
    CVector<double> v(2);
    v << cd(1, 0), cd(0, 1);
    CHECK_NOTHROW(UnitModulusVector<double>(v));
    v(1) = cd(0, 1.001);
    CHECK_THROWS_AS(UnitModulusVector<double>(v), std::invalid_argument);
    Rng rng(1);
    const auto r = UnitModulusVector<double>::random(50, rng);
    for (int m = 0; m < 50; ++m)
        CHECK(std::abs(std::abs(r(m)) - 1.0) < 1e-12);
    RVector<double> ph(3);
    ph << 0.1, -2.0, 3.0;
    CHECK((UnitModulusVector<double>::from_phases(ph).phases() - ph).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("tangent projection")
{
    Rng rng(3);
    const auto th = UnitModulusVector<double>::random(8, rng);
    CHECK(project_tangent(th, th.values()).entries.norm() < 1e-15);
    const CVector<double> jt = cd(0, 1) * th.values();
    CHECK((project_tangent(th, jt).entries - jt).norm() < 1e-15);
    for (int t = 0; t < 100; ++t)
    {
        const CVector<double> d = random_complex(rng, 8);
        const auto p1 = project_tangent(th, d);
        const auto p2 = project_tangent(th, p1.entries);
        CHECK((p1.entries - p2.entries).norm() < 1e-12);
        CHECK(tangency_residual(th.values(), p1.entries) < 1e-12);
    }
    CHECK_THROWS_AS(project_tangent(th, CVector<double>(CVector<double>::Zero(3))), std::invalid_argument);
}

TEST_CASE("retraction")
{
    Rng rng(4);
    const auto th = UnitModulusVector<double>::random(6, rng);
    CHECK((retract<double>(th.values()).values() - th.values()).norm() < 1e-15);
    CVector<double> x(2);
    x << cd(2, 0), cd(0, -3);
    const auto r = retract<double>(x);
    CHECK(std::abs(r(0) - cd(1, 0)) < 1e-15);
    CHECK(std::abs(r(1) - cd(0, -1)) < 1e-15);
    x(1) = 0.0;
    CHECK_THROWS_AS(retract<double>(x), RetractionSingularity);
    for (int t = 0; t < 100; ++t)
    {
        const auto q = retract<double>(random_complex(rng, 16));
        for (int m = 0; m < 16; ++m)
            CHECK(std::abs(std::abs(q(m)) - 1.0) < 1e-12);
    }
}

TEST_CASE("Riemannian gradient")
{
    Rng rng(5);
    const auto th = UnitModulusVector<double>::random(10, rng);
    const CVector<double> perp = cd(0, 2.5) * th.values();
    CHECK((riemannian_gradient(th, perp).entries - perp).norm() < 1e-14);
    CHECK(riemannian_gradient(th, CVector<double>(CVector<double>::Zero(10))).entries.norm() == 0.0);
    for (int t = 0; t < 50; ++t)
        CHECK(tangency_residual(th.values(), riemannian_gradient(th, random_complex(rng, 10)).entries) < 1e-12);
}

TEST_CASE("Armijo search on a quadratic toy cost")
{
    Rng rng(6);
    const auto target = UnitModulusVector<double>::random(2, rng);
    auto cost = [&](const CVector<double> &th) { return (th - target.values()).squaredNorm(); };
    const ArmijoParams p;
    for (int t = 0; t < 20; ++t)
    {
        const auto th = UnitModulusVector<double>::random(2, rng);
        const auto g = riemannian_gradient(th, CVector<double>(th.values() - target.values()));
        if (g.norm() < 1e-8)
            continue;
        const TangentVector<double> d{-g.entries, th.values()};
        const auto step = armijo_search(cost, th, d, g, p);
        CHECK(step.halvings <= 1);
        CHECK(step.cost < cost(th.values()));
    }

    const auto th = UnitModulusVector<double>::random(2, rng);
    const auto g = riemannian_gradient(th, CVector<double>(th.values() - target.values()));
    const TangentVector<double> zero{CVector<double>::Zero(2), th.values()};
    const auto s0 = armijo_search(cost, th, zero, g, p);
    CHECK(s0.step == 1.0);
    CHECK(s0.halvings == 0);
    CHECK(s0.cost == Catch::Approx(cost(th.values())).epsilon(1e-15));

    const TangentVector<double> ascent{g.entries, th.values()};
    CHECK_THROWS_AS(armijo_search(cost, th, ascent, g, p), NotDescentDirection);

    ArmijoParams bad;
    bad.shrink = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Armijo search reports failure after max halvings")
{
    // Cost that never decreases along the supplied direction.
    auto cost = [](const CVector<double> &th) { return -th(0).real(); };
    const auto th = UnitModulusVector<double>::ones(1);
    TangentVector<double> g{CVector<double>::Constant(1, cd(0, -1)), th.values()};
    TangentVector<double> d{CVector<double>::Constant(1, cd(0, 1)), th.values()};
    ArmijoParams p;
    p.max_halvings = 5;
    CHECK_THROWS_AS(armijo_search(cost, th, d, g, p), LineSearchFailure);
}

TEST_CASE("RCG finds the M=2 phase-matching optimum")
{
    Rng rng(8);
    for (int inst = 0; inst < 5; ++inst)
    {
        const CVector<double> a = random_complex(rng, 2), b = random_complex(rng, 2);
        const CVector<double> c = a.conjugate().cwiseProduct(b);
        auto cost = [&](const CVector<double> &th) { return -std::norm(cd(c.transpose() * th)); };
        auto grad = [&](const CVector<double> &th) -> CVector<double> {
            const cd s = c.transpose() * th;
            return -s * c.conjugate();
        };
        double grid_best = 0.0;
        for (int i = 0; i < 360; ++i)
            for (int j = 0; j < 360; ++j)
            {
                CVector<double> th(2);
                th << std::polar(1.0, i * std::numbers::pi / 180.0), std::polar(1.0, j * std::numbers::pi / 180.0);
                grid_best = std::min(grid_best, cost(th));
            }
        const auto res = rcg_minimize(cost, grad, UnitModulusVector<double>::random(2, rng));
        const double optimum = -std::pow(c.cwiseAbs().sum(), 2);
        CHECK(res.cost_trace.back() <= grid_best + 1e-6);
        CHECK(std::abs(res.cost_trace.back() - optimum) < 1e-6);
    }
}

TEST_CASE("RCG returns immediately at a critical point")
{
    auto cost = [](const CVector<double> &) { return 0.0; };
    auto grad = [](const CVector<double> &th) -> CVector<double> { return CVector<double>::Zero(th.size()); };
    const auto res = rcg_minimize(cost, grad, UnitModulusVector<double>::ones(4));
    CHECK(res.cost_trace.size() == 1);
    CHECK(res.status == RcgStatus::gradient_converged);
}

TEST_CASE("RCG iterates stay on the manifold with a monotone trace")
{
    Rng rng(9);
    for (int inst = 0; inst < 5; ++inst)
    {
        const int m = 12;
        QuarticCost q{CMatrix<double>(30, m), RVector<double>(30)};
        for (int j = 0; j < 30; ++j)
        {
            q.u.row(j) = random_complex(rng, m).transpose() / std::sqrt(double(m));
            q.t(j) = rng.uniform(0.0, 2.0);
        }
        std::vector<CVector<double>> iterates;
        auto cost = [&](const CVector<double> &th) { return q(th); };
        auto grad = [&](const CVector<double> &th) -> CVector<double> {
            iterates.push_back(th);
            return q.grad(th);
        };
        RcgOptions opt;
        opt.max_iters = 200;
        const auto res = rcg_minimize(cost, grad, UnitModulusVector<double>::random(m, rng), opt);
        for (std::size_t i = 1; i < res.cost_trace.size(); ++i)
            CHECK(res.cost_trace[i] <= res.cost_trace[i - 1]);
        CHECK(res.max_tangency_residual < 1e-10);
        for (const auto &th : iterates)
            CHECK((th.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(res.cost_trace.back() < res.cost_trace.front());
        CHECK(res.direction_resets <= res.iterations + 1);
    }
}
