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

#ifndef RISBC_SYNTHESIS_HPP
#define RISBC_SYNTHESIS_HPP

// Alternating precoder / RIS-phase optimization of the flat-top pattern and
// the beam-shift predictor for a re-illuminated RIS.

#include "risbc/manifold.hpp"
#include "risbc/pattern.hpp"
#include "risbc/rng.hpp"
#include "risbc/types.hpp"

#include <Eigen/Eigenvalues>

#include <future>
#include <optional>
#include <vector>

namespace risbc::synthesis
{

using pattern::ChannelStats;
using pattern::DiscreteTarget;
using pattern::PatternModel;
using pattern::WeightConfig;

// BS precoder; the exported solution has unit Frobenius norm.
template <typename Real = double>
class Precoder
{
  public:
    explicit Precoder(CMatrix<Real> matrix) : matrix_(std::move(matrix))
    {
        if (matrix_.size() == 0 || !(matrix_.squaredNorm() > Real(0)))
            throw std::invalid_argument("Precoder: zero matrix");
    }

    static Precoder normalized(const CMatrix<Real> &m)
    {
        Precoder p(m);
        p.matrix_ /= p.matrix_.norm();
        return p;
    }

    // i.i.d. CN(0, 1) entries, column-major draw order, then normalized.
    static Precoder random(Eigen::Index num_bs, Eigen::Index num_streams, Rng &rng)
    {
        CMatrix<Real> m(num_bs, num_streams);
        for (Eigen::Index c = 0; c < num_streams; ++c)
            for (Eigen::Index r = 0; r < num_bs; ++r)
                m(r, c) = static_cast<Complex<Real>>(rng.circular_normal(1.0));
        return normalized(m);
    }

    const CMatrix<Real> &matrix() const { return matrix_; }
    Eigen::Index num_bs() const { return matrix_.rows(); }
    Eigen::Index num_streams() const { return matrix_.cols(); }

  private:
    CMatrix<Real> matrix_;
};

// Gradients with respect to conj(W) and conj(theta) with the weights gamma
// held fixed. For a real cost J(z), dJ/dRe z + j dJ/dIm z = 2 dJ/dz*.
template <typename Real>
CMatrix<Real> grad_precoder(const CMatrix<Real> &w, const CVector<Real> &theta, const PatternModel<Real> &model,
                            const RVector<Real> &f, const RVector<Real> &gamma, bool enforce_unit_modulus = true)
{
    const Real n2 = w.squaredNorm();
    if (!(n2 > Real(0)))
        throw std::invalid_argument("grad_precoder: zero precoder");
    if (f.size() != model.num_samples() || gamma.size() != model.num_samples())
        throw std::invalid_argument("grad_precoder: target or weights do not match the grid");
    const RMatrix<Real> x2 = model.array_factors(theta, enforce_unit_modulus).cwiseAbs2();
    const RVector<Real> ybar = model.pattern_from_abs2(x2, model.excitation(w)) / n2;
    const Real first = (gamma.array() * f.array() * ybar.array()).sum() - (gamma.array() * ybar.array().square()).sum();
    const RVector<Real> e = x2.transpose() * (gamma.array() * (ybar - f).array()).matrix();
    const auto &b = model.stats().bs_steering;
    const CVector<Real> le = (e.array() * model.stats().path_powers.array()).matrix().template cast<Complex<Real>>();
    return (Real(2) / n2) * (first * w + model.scale() * (b * le.asDiagonal() * (b.adjoint() * w)));
}

namespace detail
{

// Prop. 2 gradient from cached array factors X and excitation chi.
template <typename Real>
CVector<Real> grad_theta_cached(const CMatrix<Real> &x, const RVector<Real> &chi, Real n2,
                                const PatternModel<Real> &model, const RVector<Real> &ybar, const RVector<Real> &f,
                                const RVector<Real> &gamma)
{
    const RVector<Real> d = gamma.array() * (ybar - f).array();
    // sum_j conj(A~_jm) d_j (X C A_G^H)_jm = sum_l (A~^H diag(d) X)_ml chi_l conj(A_G)_ml
    const CMatrix<Real> t =
        model.grid_steering_matrix().adjoint() * (d.template cast<Complex<Real>>().asDiagonal() * x);
    const CVector<Real> chic = chi.template cast<Complex<Real>>();
    const CVector<Real> g = (t.array() * model.stats().ris_steering.conjugate().array()).matrix() * chic;
    return (Real(2) * model.scale() / n2) * g;
}

} // namespace detail

template <typename Real>
CVector<Real> grad_theta(const CVector<Real> &theta, const CMatrix<Real> &w, const PatternModel<Real> &model,
                         const RVector<Real> &f, const RVector<Real> &gamma, bool enforce_unit_modulus = true)
{
    const Real n2 = w.squaredNorm();
    if (!(n2 > Real(0)))
        throw std::invalid_argument("grad_theta: zero precoder");
    if (f.size() != model.num_samples() || gamma.size() != model.num_samples())
        throw std::invalid_argument("grad_theta: target or weights do not match the grid");
    const RVector<Real> chi = model.excitation(w);
    const CMatrix<Real> x = model.array_factors(theta, enforce_unit_modulus);
    const RVector<Real> ybar = model.pattern(x, chi) / n2;
    return detail::grad_theta_cached(x, chi, n2, model, ybar, f, gamma);
}

struct CgOptions
{
    manifold::ArmijoParams armijo;
    double grad_tol = 1e-6;
    double rel_cost_tol = 1e-8;
    int max_iters = 500;
};

template <typename Real>
struct PrecoderResult
{
    Precoder<Real> precoder;
    std::vector<Real> cost_trace;
    bool line_search_warning = false;
};

namespace detail
{

// Cost and gradient of the precoder subproblem at fixed theta; |X|^2 is cached.
template <typename Real>
class PrecoderProblem
{
  public:
    PrecoderProblem(const PatternModel<Real> &model, const CVector<Real> &theta, const DiscreteTarget<Real> &target,
                    const WeightConfig &weights)
        : model_(model), target_(target), weights_(weights), x2_(model.array_factors(theta).cwiseAbs2())
    {
    }

    RVector<Real> normalized_pattern(const CMatrix<Real> &w) const
    {
        return model_.pattern_from_abs2(x2_, model_.excitation(w)) / w.squaredNorm();
    }

    Real cost(const CMatrix<Real> &w) const { return pattern::cost(normalized_pattern(w), target_, weights_); }

    CMatrix<Real> gradient(const CMatrix<Real> &w) const
    {
        const Real n2 = w.squaredNorm();
        const RVector<Real> ybar = normalized_pattern(w);
        const RVector<Real> gamma = pattern::compute_weights(ybar, target_, weights_);
        const auto &f = target_.values;
        const Real first =
            (gamma.array() * f.array() * ybar.array()).sum() - (gamma.array() * ybar.array().square()).sum();
        const RVector<Real> e = x2_.transpose() * (gamma.array() * (ybar - f).array()).matrix();
        const auto &b = model_.stats().bs_steering;
        const CVector<Real> le =
            (e.array() * model_.stats().path_powers.array()).matrix().template cast<Complex<Real>>();
        return (Real(2) / n2) * (first * w + model_.scale() * (b * le.asDiagonal() * (b.adjoint() * w)));
    }

  private:
    const PatternModel<Real> &model_;
    const DiscreteTarget<Real> &target_;
    const WeightConfig &weights_;
    RMatrix<Real> x2_;
};

// Cost and gradient of the phase subproblem at fixed W; chi is cached.
template <typename Real>
class PhaseProblem
{
  public:
    PhaseProblem(const PatternModel<Real> &model, const CMatrix<Real> &w, const DiscreteTarget<Real> &target,
                 const WeightConfig &weights)
        : model_(model), target_(target), weights_(weights), chi_(model.excitation(w)), n2_(w.squaredNorm())
    {
    }

    Real cost(const CVector<Real> &theta) const
    {
        return pattern::cost((model_.pattern(model_.array_factors(theta), chi_) / n2_).eval(), target_, weights_);
    }

    CVector<Real> gradient(const CVector<Real> &theta) const
    {
        const CMatrix<Real> x = model_.array_factors(theta);
        const RVector<Real> ybar = model_.pattern(x, chi_) / n2_;
        const RVector<Real> gamma = pattern::compute_weights(ybar, target_, weights_);
        return grad_theta_cached(x, chi_, n2_, model_, ybar, target_.values, gamma);
    }

  private:
    const PatternModel<Real> &model_;
    const DiscreteTarget<Real> &target_;
    const WeightConfig &weights_;
    RVector<Real> chi_;
    Real n2_;
};

} // namespace detail

// Euclidean Polak-Ribiere (PR+) conjugate gradient over W with Armijo steps.
// The result is rescaled to unit Frobenius norm, which leaves J unchanged.
template <typename Real>
PrecoderResult<Real> optimize_precoder(const CMatrix<Real> &w0, const CVector<Real> &theta,
                                       const PatternModel<Real> &model, const DiscreteTarget<Real> &target,
                                       const WeightConfig &weights, const CgOptions &opt = {})
{
    if (!(w0.squaredNorm() > Real(0)))
        throw std::invalid_argument("optimize_precoder: zero initial precoder");
    opt.armijo.validate();
    const detail::PrecoderProblem<Real> prob(model, theta, target, weights);

    CMatrix<Real> w = w0;
    Real j = prob.cost(w);
    PrecoderResult<Real> res{Precoder<Real>(w0), {j}, false};
    CMatrix<Real> g = prob.gradient(w);
    CMatrix<Real> d = -g;

    bool force_steepest = false;
    for (int t = 0; t < opt.max_iters && g.norm() >= static_cast<Real>(opt.grad_tol); ++t)
    {
        bool steepest = false;
        if (force_steepest || real_inner(g, d) >= Real(0))
        {
            force_steepest = false;
            d = -g;
            steepest = true;
        }
        const Real slope = real_inner(g, d);
        Real step = static_cast<Real>(opt.armijo.initial_step);
        bool accepted = false;
        Real j_next = j;
        CMatrix<Real> w_next;
        for (int n = 0; n <= opt.armijo.max_halvings; ++n, step *= static_cast<Real>(opt.armijo.shrink))
        {
            w_next = w + step * d;
            if (!(w_next.squaredNorm() > Real(0)))
                continue;
            j_next = prob.cost(w_next);
            if (j - j_next >= -static_cast<Real>(opt.armijo.sufficient_decrease) * step * slope)
            {
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            if (!steepest)
            {
                force_steepest = true; // retry along steepest descent
                continue;
            }
            res.line_search_warning = true;
            break;
        }
        const CMatrix<Real> g_next = prob.gradient(w_next);
        Real beta = real_inner(g_next, (g_next - g).eval()) / g.squaredNorm();
        beta = std::max(beta, Real(0));
        d = -g_next + beta * d;
        const Real rel = std::abs(j - j_next) / std::max(std::abs(j), std::numeric_limits<Real>::min());
        w = std::move(w_next);
        g = g_next;
        j = j_next;
        res.cost_trace.push_back(j);
        if (rel < static_cast<Real>(opt.rel_cost_tol))
            break;
    }
    res.precoder = Precoder<Real>::normalized(w);
    return res;
}

template <typename Real>
manifold::RcgResult<Real> optimize_phases(const manifold::UnitModulusVector<Real> &theta0, const CMatrix<Real> &w,
                                          const PatternModel<Real> &model, const DiscreteTarget<Real> &target,
                                          const WeightConfig &weights, const manifold::RcgOptions &opt = {})
{
    const detail::PhaseProblem<Real> prob(model, w, target, weights);
    return manifold::rcg_minimize(
        [&](const CVector<Real> &th) { return prob.cost(th); },
        [&](const CVector<Real> &th) { return prob.gradient(th); }, theta0, opt);
}

struct SynthesisOptions
{
    int num_streams = 4;
    int num_starts = 3;
    std::uint64_t seed = 1;
    int max_outer_iters = 50;
    double outer_rel_tol = 1e-4;
    manifold::RcgOptions phase;
    CgOptions precoder;
    bool parallel_starts = true;

    void validate() const
    {
        if (num_streams < 1)
            throw ConfigError("synthesis: num_streams must be >= 1");
        if (num_starts < 1)
            throw ConfigError("synthesis: num_starts must be >= 1");
        if (max_outer_iters < 1)
            throw ConfigError("synthesis: max_outer_iters must be >= 1");
        if (!(outer_rel_tol >= 0.0))
            throw ConfigError("synthesis: outer_rel_tol must be >= 0");
        phase.armijo.validate();
        precoder.armijo.validate();
    }
};

template <typename Real = double>
struct SynthesisResult
{
    manifold::UnitModulusVector<Real> theta;
    Precoder<Real> precoder;
    std::vector<Real> outer_cost_trace;
    std::vector<std::vector<Real>> precoder_cost_traces; // one per outer iteration
    std::vector<std::vector<Real>> phase_cost_traces;    // one per outer iteration
    RVector<Real> achieved_pattern;                      // ybar
    Real flat_top_ripple_db = Real(0);
    Real flat_top_mean = Real(0);
    int start_index = 0;
    std::uint64_t start_seed = 0;
    std::vector<Real> start_costs;
    int warnings = 0;

    Real final_cost() const { return outer_cost_trace.back(); }
};

// 10 log10(max / min) of the pattern over the flat-top samples.
template <typename Real>
Real flat_top_ripple_db(const RVector<Real> &ybar, const DiscreteTarget<Real> &target)
{
    Real lo = std::numeric_limits<Real>::infinity(), hi = Real(0);
    bool any = false;
    for (Eigen::Index j = 0; j < ybar.size(); ++j)
        if (target.regions[static_cast<std::size_t>(j)] == pattern::Region::flat)
        {
            lo = std::min(lo, ybar(j));
            hi = std::max(hi, ybar(j));
            any = true;
        }
    if (!any)
        throw std::invalid_argument("flat_top_ripple_db: no flat-top samples");
    if (!(lo > Real(0)))
        return std::numeric_limits<Real>::infinity();
    return Real(10) * std::log10(hi / lo);
}

template <typename Real>
Real flat_top_mean(const RVector<Real> &ybar, const DiscreteTarget<Real> &target)
{
    Real s = Real(0);
    int n = 0;
    for (Eigen::Index j = 0; j < ybar.size(); ++j)
        if (target.regions[static_cast<std::size_t>(j)] == pattern::Region::flat)
        {
            s += ybar(j);
            ++n;
        }
    if (n == 0)
        throw std::invalid_argument("flat_top_mean: no flat-top samples");
    return s / static_cast<Real>(n);
}

// Single start of the alternating optimization.
template <typename Real>
SynthesisResult<Real> synthesize_from(const manifold::UnitModulusVector<Real> &theta0, const CMatrix<Real> &w0,
                                      const PatternModel<Real> &model, const DiscreteTarget<Real> &target,
                                      const WeightConfig &weights, const SynthesisOptions &opt)
{
    manifold::UnitModulusVector<Real> theta = theta0;
    Precoder<Real> w = Precoder<Real>::normalized(w0);
    SynthesisResult<Real> res{theta, w, {}, {}, {}, {}, Real(0), Real(0), 0, 0, {}, 0};
    Real j = pattern::cost(theta.values(), w.matrix(), target, weights, model);
    res.outer_cost_trace.push_back(j);

    for (int it = 0; it < opt.max_outer_iters; ++it)
    {
        PrecoderResult<Real> pr = optimize_precoder(w.matrix(), theta.values(), model, target, weights, opt.precoder);
        if (pr.cost_trace.back() <= j)
            w = pr.precoder;
        res.warnings += pr.line_search_warning ? 1 : 0;
        res.precoder_cost_traces.push_back(std::move(pr.cost_trace));

        manifold::RcgResult<Real> rr = optimize_phases(theta, w.matrix(), model, target, weights, opt.phase);
        res.warnings += rr.status == manifold::RcgStatus::line_search_warning ? 1 : 0;
        theta = rr.theta;
        res.phase_cost_traces.push_back(std::move(rr.cost_trace));

        const Real j_next = pattern::cost(theta.values(), w.matrix(), target, weights, model);
        const Real rel = std::abs(j - j_next) / std::max(std::abs(j), std::numeric_limits<Real>::min());
        j = j_next;
        res.outer_cost_trace.push_back(j);
        if (rel < static_cast<Real>(opt.outer_rel_tol))
            break;
    }
    res.theta = theta;
    res.precoder = w;
    res.achieved_pattern = model.normalized_pattern(theta.values(), w.matrix());
    res.flat_top_ripple_db = flat_top_ripple_db(res.achieved_pattern, target);
    res.flat_top_mean = flat_top_mean(res.achieved_pattern, target);
    return res;
}

// Multi-start alternating optimization. Start s draws theta0 (uniform phases)
// then W0 (normalized complex Gaussian) from derive_seed(seed, s); the start
// with the lowest final cost wins, ties going to the lowest start index.
template <typename Real>
SynthesisResult<Real> synthesize(const PatternModel<Real> &model, const DiscreteTarget<Real> &target,
                                 const WeightConfig &weights, const SynthesisOptions &opt)
{
    opt.validate();
    weights.validate();
    if (target.size() != model.num_samples())
        throw std::invalid_argument("synthesize: target does not match the grid");

    auto run = [&](int s) {
        const std::uint64_t seed = derive_seed(opt.seed, static_cast<std::uint64_t>(s));
        Rng rng(seed);
        const auto theta0 = manifold::UnitModulusVector<Real>::random(model.stats().num_ris(), rng);
        const auto w0 = Precoder<Real>::random(model.stats().num_bs(), opt.num_streams, rng);
        SynthesisResult<Real> r = synthesize_from(theta0, w0.matrix(), model, target, weights, opt);
        r.start_index = s;
        r.start_seed = seed;
        return r;
    };

    std::vector<SynthesisResult<Real>> results;
    if (opt.parallel_starts && opt.num_starts > 1)
    {
        std::vector<std::future<SynthesisResult<Real>>> jobs;
        for (int s = 0; s < opt.num_starts; ++s)
            jobs.push_back(std::async(std::launch::async, run, s));
        for (auto &f : jobs)
            results.push_back(f.get());
    }
    else
    {
        for (int s = 0; s < opt.num_starts; ++s)
            results.push_back(run(s));
    }

    std::size_t best = 0;
    for (std::size_t s = 1; s < results.size(); ++s)
        if (results[s].final_cost() < results[best].final_cost())
            best = s;
    std::vector<Real> costs;
    for (const auto &r : results)
        costs.push_back(r.final_cost());
    SynthesisResult<Real> out = std::move(results[best]);
    out.start_costs = std::move(costs);
    return out;
}

// Flat-top level derived from the power budget: a fraction `efficiency` of the
// largest reflected energy 2 M N_BS lambda_max(B_G Lambda B_G^H), spread evenly
// in cos(phi) over the flat-top region.
template <typename Real>
double energy_flat_power(const ChannelStats<Real> &stats, const pattern::TargetPattern &t, double efficiency)
{
    if (!(efficiency > 0.0))
        throw ConfigError("flat power efficiency must be positive");
    const CMatrix<Real> r = stats.bs_steering * stats.path_powers.template cast<Complex<Real>>().asDiagonal() *
                            stats.bs_steering.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(r, Eigen::EigenvaluesOnly);
    const double lam = static_cast<double>(es.eigenvalues().maxCoeff());
    const double du = std::cos(t.flat_lo()) - std::cos(t.flat_hi());
    return efficiency * 2.0 * static_cast<double>(stats.num_bs()) * static_cast<double>(stats.num_ris()) * lam / du;
}

struct CoverageRegion
{
    double lo; // phi_min, radians
    double hi; // phi_max, radians

    void validate() const
    {
        if (!(lo >= 0.0 && lo < hi && hi <= pi_v<double>))
            throw std::invalid_argument("CoverageRegion: require 0 <= lo < hi <= pi");
    }
    double width() const { return hi - lo; }
};

class HypothesisViolation : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

// Flat-top region after the incident angle moves from phi0 to phi1:
// cos(phi') = cos(phi) + xi, xi = cos(phi0) - cos(phi1). Returns nullopt when
// the whole region leaves [0, pi].
inline std::optional<CoverageRegion> predict_shifted_region(const CoverageRegion &region, double phi0, double phi1)
{
    region.validate();
    const double half = pi_v<double> / 2.0;
    if (region.lo < half || region.hi > pi_v<double>)
        throw HypothesisViolation("predict_shifted_region: region must lie in [pi/2, pi]");
    if (!(phi0 > 0.0 && phi0 < pi_v<double> && phi1 > 0.0 && phi1 < pi_v<double>))
        throw std::invalid_argument("predict_shifted_region: incident angles must lie in (0, pi)");
    if (phi0 == phi1)
        return region;
    const double xi = std::cos(phi0) - std::cos(phi1);
    const double c_lo = std::cos(region.lo) + xi;
    double c_hi = std::cos(region.hi) + xi;
    if (phi1 < phi0)
    {
        if (c_lo <= -1.0)
            return std::nullopt;
        c_hi = std::max(-1.0, c_hi);
        return CoverageRegion{std::acos(c_lo), std::acos(c_hi)};
    }
    if (c_hi >= 1.0)
        return std::nullopt;
    if (c_lo > 1.0)
        throw HypothesisViolation("predict_shifted_region: shifted lower edge leaves [0, pi]");
    return CoverageRegion{std::acos(c_lo), std::acos(c_hi)};
}

// Contiguous region around `around` (radians) where the pattern stays at or
// above `threshold`. Edges are located by linear interpolation between grid
// samples; a region still above threshold at the first or last sample extends
// to 0 or pi.
template <typename Real>
std::optional<CoverageRegion> measure_region(const RVector<Real> &values, const pattern::AngularGrid &grid,
                                             Real threshold, double around)
{
    if (values.size() != grid.size())
        throw std::invalid_argument("measure_region: size mismatch");
    const Eigen::Index n = grid.size();
    auto j0 = static_cast<Eigen::Index>(std::llround(around / grid.spacing()));
    j0 = std::clamp<Eigen::Index>(j0, 0, n - 1);
    if (values(j0) < threshold)
    {
        // nearest above-threshold sample
        Eigen::Index best = -1;
        for (Eigen::Index d = 1; d < n && best < 0; ++d)
        {
            if (j0 - d >= 0 && values(j0 - d) >= threshold)
                best = j0 - d;
            else if (j0 + d < n && values(j0 + d) >= threshold)
                best = j0 + d;
        }
        if (best < 0)
            return std::nullopt;
        j0 = best;
    }
    auto crossing = [&](Eigen::Index inside, Eigen::Index outside) {
        const double a = static_cast<double>(values(inside) - threshold);
        const double b = static_cast<double>(values(outside) - threshold);
        const double t = a / (a - b);
        return grid.angle(inside) + t * (grid.angle(outside) - grid.angle(inside));
    };
    Eigen::Index lo = j0, hi = j0;
    while (lo > 0 && values(lo - 1) >= threshold)
        --lo;
    while (hi < n - 1 && values(hi + 1) >= threshold)
        ++hi;
    const double a_lo = lo == 0 ? 0.0 : crossing(lo, lo - 1);
    const double a_hi = hi == n - 1 ? pi_v<double> : crossing(hi, hi + 1);
    if (!(a_hi > a_lo))
        return std::nullopt;
    return CoverageRegion{a_lo, a_hi};
}

// -3 dB region relative to the mean flat-top level.
template <typename Real>
std::optional<CoverageRegion> half_power_region(const RVector<Real> &values, const pattern::AngularGrid &grid,
                                                Real reference_level, double around)
{
    return measure_region(values, grid, reference_level * static_cast<Real>(std::pow(10.0, -0.3)), around);
}

} // namespace risbc::synthesis

#endif
