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

#include "risbc/synthesis.hpp"

#include <catch_amalgamated.hpp>

using namespace risbc;
using namespace risbc::pattern;
using namespace risbc::synthesis;
using Catch::Approx;
using cd = std::complex<double>;

namespace
{

const double kPi = std::numbers::pi;
const double kDeg = kPi / 180.0;

CMatrix<double> random_matrix(Rng &rng, int r, int c)
{
    CMatrix<double> w(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i)
            w(i, j) = rng.circular_normal(1.0);
    return w;
}

CVector<double> random_phases(Rng &rng, int m)
{
    CVector<double> v(m);
    for (int i = 0; i < m; ++i)
        v(i) = rng.unit_phasor();
    return v;
}

channel::PathSet<double> uniform_paths(Rng &rng, int l, double arrival_lo = 0.0, double arrival_hi = kPi)
{
    CVector<double> g(l);
    RVector<double> a(l), d(l), p(l);
    std::vector<int> taps;
    for (int i = 0; i < l; ++i)
    {
        p(i) = 1.0 / l;
        g(i) = rng.circular_normal(p(i));
        a(i) = rng.uniform(arrival_lo, arrival_hi);
        d(i) = rng.uniform(-kPi / 2, kPi / 2);
        taps.push_back(0);
    }
    return channel::PathSet<double>(g, a, d, taps, p);
}

struct Instance
{
    AngularGrid grid;
    ChannelStats<double> stats;
    DiscreteTarget<double> target;
    CVector<double> theta;
    CMatrix<double> w;
};

Instance random_instance(Rng &rng, int m, int n, int nd, int l)
{
    Instance in{{4, m}, channel_stats<double>(uniform_paths(rng, l), {m}, {n}), {}, random_phases(rng, m),
                random_matrix(rng, n, nd)};
    const PatternModel<double> model(in.grid, in.stats);
    const double level = model.normalized_pattern(in.theta, in.w).mean();
    const double lo = rng.uniform(40, 90) * kDeg;
    const auto t = TargetPattern::covering(lo, lo + 50 * kDeg, 1.5 * level, 0.2 * level, 0.2);
    in.target = discretize<double>(t, in.grid);
    return in;
}

// Cost with weights frozen at gamma (the setting of the analytic gradients).
double frozen_cost(const PatternModel<double> &model, const CVector<double> &th, const CMatrix<double> &w,
                   const RVector<double> &f, const RVector<double> &gamma)
{
    return weighted_cost<double>(model.normalized_pattern(th, w, false), f, gamma);
}

// Central differences over real and imaginary parts: dJ/dRe + j dJ/dIm.
template <typename F>
CVector<double> fd_gradient(F &&fun, const CVector<double> &x, double h)
{
    CVector<double> g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
    {
        CVector<double> p = x, q = x;
        p(i) += h;
        q(i) -= h;
        const double dre = (fun(p) - fun(q)) / (2 * h);
        p = x;
        q = x;
        p(i) += cd(0, h);
        q(i) -= cd(0, h);
        const double dim = (fun(p) - fun(q)) / (2 * h);
        g(i) = cd(dre, dim);
    }
    return g;
}

double rel_err(const CVector<double> &analytic, const CVector<double> &fd)
{
    return (analytic - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("precoder gradient matches finite differences")
{
    Rng rng(100);
    for (int inst = 0; inst < 20; ++inst)
    {
        const auto in = random_instance(rng, 8, 4, 2, 2);
        const PatternModel<double> model(in.grid, in.stats);
        const RVector<double> gamma =
            compute_weights(model.normalized_pattern(in.theta, in.w), in.target, WeightConfig{});
        const CMatrix<double> g = grad_precoder(in.w, in.theta, model, in.target.values, gamma);
        const CVector<double> wv = in.w.reshaped();
        auto fun = [&](const CVector<double> &v) {
            return frozen_cost(model, in.theta, v.reshaped(in.w.rows(), in.w.cols()), in.target.values, gamma);
        };
        const CVector<double> fd = fd_gradient(fun, wv, 1e-6);
        CHECK(rel_err(CVector<double>(2.0 * g.reshaped()), fd) < 1e-5);
        // scale invariance: no first-order change along W itself
        CHECK(std::abs(real_inner(in.w, g)) < 1e-9 * g.norm() * in.w.norm());
    }
}

TEST_CASE("phase gradient matches finite differences")
{
    Rng rng(200);
    for (int inst = 0; inst < 20; ++inst)
    {
        const auto in = random_instance(rng, 8, 4, 2, 2);
        const PatternModel<double> model(in.grid, in.stats);
        const RVector<double> gamma =
            compute_weights(model.normalized_pattern(in.theta, in.w), in.target, WeightConfig{});
        const CVector<double> g = grad_theta(in.theta, in.w, model, in.target.values, gamma);
        auto fun = [&](const CVector<double> &th) { return frozen_cost(model, th, in.w, in.target.values, gamma); };
        CHECK(rel_err(CVector<double>(2.0 * g), fd_gradient(fun, in.theta, 1e-6)) < 1e-5);
    }
}

TEST_CASE("phase gradient is the diagonal of the unconstrained matrix gradient")
{
    Rng rng(300);
    for (int inst = 0; inst < 5; ++inst)
    {
        const auto in = random_instance(rng, 8, 4, 2, 3);
        const PatternModel<double> model(in.grid, in.stats);
        const RVector<double> gamma =
            compute_weights(model.normalized_pattern(in.theta, in.w), in.target, WeightConfig{});
        const CMatrix<double> at = grid_steering<double>(in.grid);
        const RVector<double> chi = model.excitation(in.w);
        const CMatrix<double> v = in.stats.ris_steering * chi.cast<cd>().asDiagonal() * in.stats.ris_steering.adjoint();
        const double c = model.scale() / in.w.squaredNorm();
        const int m = 8;
        // J as a function of a full M x M phase matrix with independent entries
        auto cost_full = [&](const CMatrix<double> &tt) {
            const RVector<double> ybar = c * (at * tt * v * tt.adjoint() * at.adjoint()).diagonal().real();
            return weighted_cost<double>(ybar, in.target.values, gamma);
        };
        // J is a quartic polynomial along every coordinate line, so the
        // five-point stencil is exact up to rounding.
        const double h = 1e-3;
        auto deriv = [&](const CMatrix<double> &base, int r, int s, cd dir) {
            auto at_t = [&](double t) {
                CMatrix<double> x = base;
                x(r, s) += t * dir;
                return cost_full(x);
            };
            return (-at_t(2 * h) + 8 * at_t(h) - 8 * at_t(-h) + at_t(-2 * h)) / (12 * h);
        };
        const CMatrix<double> base = in.theta.asDiagonal();
        CMatrix<double> full(m, m);
        for (int r = 0; r < m; ++r)
            for (int s = 0; s < m; ++s)
                full(r, s) = 0.5 * cd(deriv(base, r, s, cd(1, 0)), deriv(base, r, s, cd(0, 1)));
        const CVector<double> g = grad_theta(in.theta, in.w, model, in.target.values, gamma);
        CHECK(rel_err(g, CVector<double>(full.diagonal())) < 1e-8);
    }
}

TEST_CASE("gradients vanish when the pattern equals the target")
{
    Rng rng(400);
    const auto in = random_instance(rng, 8, 4, 2, 2);
    const PatternModel<double> model(in.grid, in.stats);
    const RVector<double> ybar = model.normalized_pattern(in.theta, in.w);
    const RVector<double> gamma = RVector<double>::Constant(ybar.size(), 3.0);
    CHECK(grad_precoder(in.w, in.theta, model, ybar, gamma).norm() < 1e-12 * ybar.maxCoeff());
    CHECK(grad_theta(in.theta, in.w, model, ybar, gamma).norm() < 1e-12 * ybar.maxCoeff());
    CHECK_THROWS_AS(grad_precoder(CMatrix<double>(CMatrix<double>::Zero(4, 2)), in.theta, model, ybar, gamma),
                    std::invalid_argument);
    CHECK_THROWS_AS(grad_theta(in.theta, in.w, model, RVector<double>(3), gamma), std::invalid_argument);
}

TEST_CASE("precoder optimization is monotone and normalized")
{
    Rng rng(500);
    const auto in = random_instance(rng, 12, 6, 2, 3);
    const PatternModel<double> model(in.grid, in.stats);
    const WeightConfig wc;
    const auto res = optimize_precoder(in.w, in.theta, model, in.target, wc);
    for (std::size_t i = 1; i < res.cost_trace.size(); ++i)
        CHECK(res.cost_trace[i] <= res.cost_trace[i - 1]);
    CHECK(res.precoder.matrix().norm() == Approx(1.0).epsilon(1e-12));
    const double j_final = cost(in.theta, res.precoder.matrix(), in.target, wc, model);
    CHECK(j_final == Approx(res.cost_trace.back()).epsilon(1e-12));
    CHECK(j_final <= cost(in.theta, in.w, in.target, wc, model));
}

TEST_CASE("precoder optimization leaves a stationary point alone")
{
    Rng rng(501);
    const auto in = random_instance(rng, 8, 4, 1, 1);
    const PatternModel<double> model(in.grid, in.stats);
    DiscreteTarget<double> exact = in.target;
    exact.values = model.normalized_pattern(in.theta, in.w);
    const auto res = optimize_precoder(in.w, in.theta, model, exact, WeightConfig{});
    CHECK(res.cost_trace.size() == 1);
    CHECK((res.precoder.matrix() - in.w / in.w.norm()).norm() < 1e-14);
}

TEST_CASE("synthesis of a narrow beam from a single LoS path peaks at the target centre")
{
    const int m = 16, n = 4;
    CVector<double> g(1);
    g << cd(1, 0);
    RVector<double> a(1), d(1), p(1);
    a << 70 * kDeg;
    d << 0.2;
    p << 1.0;
    const auto stats = channel_stats<double>(channel::PathSet<double>(g, a, d, {0}, p), {m}, {n});
    const AngularGrid grid{10, m};
    const PatternModel<double> model(grid, stats);
    // half-power beam of a 16-element array around 110 degrees
    const auto t = TargetPattern::covering(106 * kDeg, 114 * kDeg, double(m) * m * n, double(m) * n / 100, 0.1);
    validate_target_on_grid(t, grid);
    const auto target = discretize<double>(t, grid);
    SynthesisOptions opt;
    opt.num_streams = 1;
    opt.num_starts = 2;
    opt.seed = 5;
    const auto res = synthesize(model, target, WeightConfig{}, opt);
    Eigen::Index peak;
    res.achieved_pattern.maxCoeff(&peak);
    CHECK(std::abs(grid.angle(peak) - t.center) <= grid.spacing() * (1 + 1e-9));
    for (std::size_t i = 1; i < res.outer_cost_trace.size(); ++i)
        CHECK(res.outer_cost_trace[i] <= res.outer_cost_trace[i - 1]);
}

TEST_CASE("multi-start keeps the lowest final cost")
{
    Rng rng(600);
    const auto in = random_instance(rng, 12, 4, 2, 2);
    const PatternModel<double> model(in.grid, in.stats);
    SynthesisOptions opt;
    opt.num_streams = 2;
    opt.num_starts = 3;
    opt.max_outer_iters = 3;
    opt.seed = 77;
    const auto res = synthesize(model, in.target, WeightConfig{}, opt);
    REQUIRE(res.start_costs.size() == 3);
    CHECK(res.final_cost() == *std::min_element(res.start_costs.begin(), res.start_costs.end()));
    CHECK(res.final_cost() == res.start_costs[static_cast<std::size_t>(res.start_index)]);
    CHECK(res.start_seed == derive_seed(77, static_cast<std::uint64_t>(res.start_index)));
    // sequential and parallel starts give identical results
    SynthesisOptions seq = opt;
    seq.parallel_starts = false;
    const auto res2 = synthesize(model, in.target, WeightConfig{}, seq);
    CHECK(res2.start_costs == res.start_costs);
    CHECK(res2.theta.values() == res.theta.values());
    // every trace is monotone
    for (const auto &tr : res.phase_cost_traces)
        for (std::size_t i = 1; i < tr.size(); ++i)
            CHECK(tr[i] <= tr[i - 1]);
    for (const auto &tr : res.precoder_cost_traces)
        for (std::size_t i = 1; i < tr.size(); ++i)
            CHECK(tr[i] <= tr[i - 1]);
    CHECK(res.precoder.matrix().norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flat-top ripple and mean")
{
    const AngularGrid grid{10, 8};
    const auto t = TargetPattern::covering(60 * kDeg, 120 * kDeg, 10.0, 0.1, 0.1);
    const auto d = discretize<double>(t, grid);
    RVector<double> y = d.values;
    CHECK(flat_top_ripple_db(y, d) == Approx(0.0).margin(1e-15));
    CHECK(flat_top_mean(y, d) == Approx(10.0));
    const Eigen::Index j = static_cast<Eigen::Index>(std::llround(t.center / grid.spacing()));
    y(j) = 20.0;
    CHECK(flat_top_ripple_db(y, d) == Approx(10 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("shifted region prediction")
{
    const CoverageRegion r{100 * kDeg, 140 * kDeg};
    const auto same = predict_shifted_region(r, 60 * kDeg, 60 * kDeg);
    REQUIRE(same);
    CHECK(same->lo == r.lo);
    CHECK(same->hi == r.hi);

    const auto s = predict_shifted_region(r, 60 * kDeg, 70 * kDeg);
    REQUIRE(s);
    const double xi = std::cos(60 * kDeg) - std::cos(70 * kDeg);
    CHECK(xi == Approx(0.1580).margin(1e-4));
    CHECK(s->lo / kDeg == Approx(90.9).margin(0.05));
    CHECK(s->hi / kDeg == Approx(127.4).margin(0.05));

    // phi1 < phi0 clamps the upper edge at pi
    const auto c = predict_shifted_region({120 * kDeg, 175 * kDeg}, 80 * kDeg, 60 * kDeg);
    REQUIRE(c);
    CHECK(c->hi == Approx(kPi));
    // whole region leaves [0, pi]
    CHECK_FALSE(predict_shifted_region({150 * kDeg, 170 * kDeg}, 170 * kDeg, 10 * kDeg).has_value());
    CHECK_FALSE(predict_shifted_region({91 * kDeg, 95 * kDeg}, 10 * kDeg, 170 * kDeg).has_value());
    // partially out with phi1 > phi0 is rejected
    CHECK_THROWS_AS(predict_shifted_region({91 * kDeg, 170 * kDeg}, 10 * kDeg, 170 * kDeg), HypothesisViolation);
    CHECK_THROWS_AS(predict_shifted_region({80 * kDeg, 120 * kDeg}, 60 * kDeg, 70 * kDeg), HypothesisViolation);
    CHECK_THROWS_AS(predict_shifted_region(r, 0.0, 70 * kDeg), std::invalid_argument);
}

TEST_CASE("shifted region moves against the incident angle")
{
    Rng rng(700);
    int checked = 0;
    for (int t = 0; t < 500; ++t)
    {
        const double lo = rng.uniform(90, 150) * kDeg, hi = lo + rng.uniform(5, 175 * kDeg / kDeg - lo / kDeg) * kDeg;
        const double p0 = rng.uniform(5, 175) * kDeg, p1 = rng.uniform(5, 175) * kDeg;
        std::optional<CoverageRegion> s;
        try
        {
            s = predict_shifted_region({lo, std::min(hi, kPi)}, p0, p1);
        }
        catch (const HypothesisViolation &)
        {
            continue;
        }
        if (!s)
            continue;
        ++checked;
        if (p1 < p0)
            CHECK(s->lo > lo);
        else if (p1 > p0)
            CHECK(s->lo < lo);
    }
    CHECK(checked > 100);
}

TEST_CASE("region measurement interpolates crossings")
{
    const AngularGrid grid{10, 10}; // spacing pi / 100
    RVector<double> v = RVector<double>::Zero(100);
    for (int j = 40; j <= 60; ++j)
        v(j) = 1.0;
    const auto r = measure_region<double>(v, grid, 0.5, 50 * grid.spacing());
    REQUIRE(r);
    CHECK(r->lo == Approx(39.5 * grid.spacing()));
    CHECK(r->hi == Approx(60.5 * grid.spacing()));
    // edge regions extend to the interval ends
    v.setZero();
    v.head(10).setOnes();
    const auto e = measure_region<double>(v, grid, 0.5, 0.0);
    REQUIRE(e);
    CHECK(e->lo == 0.0);
    // nothing above threshold
    CHECK_FALSE(measure_region<double>(RVector<double>::Zero(100), grid, 0.5, 1.0).has_value());
}

TEST_CASE("energy-based flat power")
{
    Rng rng(800);
    const auto stats = channel_stats<double>(uniform_paths(rng, 1), {32}, {8});
    const auto t = TargetPattern::covering(90 * kDeg, 120 * kDeg, 1.0, 0.0, 0.0);
    const double du = std::cos(90 * kDeg) - std::cos(120 * kDeg);
    CHECK(energy_flat_power(stats, t, 1.0) == Approx(2.0 * 32 * 8 / du).epsilon(1e-12));
    CHECK_THROWS_AS(energy_flat_power(stats, t, 0.0), ConfigError);
}
