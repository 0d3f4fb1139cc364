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

#ifndef RISBC_MANIFOLD_HPP
#define RISBC_MANIFOLD_HPP

// Riemannian conjugate gradient on the complex-circle manifold
//   M = { theta in C^M : |theta_m| = 1 }.
//
// Tangent space at theta: { x : Re[x_m conj(theta_m)] = 0 for all m }, with the
// real inner product <x, y> = Re[x^H y] summed over entries.

#include "risbc/rng.hpp"
#include "risbc/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace risbc::manifold
{

class RetractionSingularity : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

class LineSearchFailure : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// The search direction does not decrease the cost to first order.
class NotDescentDirection : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

template <typename Real>
constexpr Real unit_modulus_tolerance()
{
    return std::max(Real(1e-12), Real(64) * std::numeric_limits<Real>::epsilon());
}

// RIS phase coefficients; every entry has magnitude one.
template <typename Real = double>
class UnitModulusVector
{
  public:
    explicit UnitModulusVector(CVector<Real> entries) : entries_(std::move(entries))
    {
        if (entries_.size() < 1)
            throw std::invalid_argument("UnitModulusVector: empty");
        for (Eigen::Index m = 0; m < entries_.size(); ++m)
        {
            const Real r = std::abs(entries_(m));
            if (!(std::abs(r - Real(1)) <= unit_modulus_tolerance<Real>()))
                throw std::invalid_argument("UnitModulusVector: entry " + std::to_string(m) +
                                            " is not unit-modulus");
        }
    }

    static UnitModulusVector from_phases(const RVector<Real> &phases)
    {
        CVector<Real> v(phases.size());
        for (Eigen::Index m = 0; m < phases.size(); ++m)
            v(m) = std::polar(Real(1), phases(m));
        return UnitModulusVector(std::move(v));
    }

    static UnitModulusVector ones(Eigen::Index m) { return UnitModulusVector(CVector<Real>::Ones(m)); }

    // i.i.d. uniform phases, one uniform() draw per entry.
    static UnitModulusVector random(Eigen::Index m, Rng &rng)
    {
        CVector<Real> v(m);
        for (Eigen::Index i = 0; i < m; ++i)
            v(i) = std::polar(Real(1), static_cast<Real>(2.0 * std::numbers::pi * rng.uniform()));
        return UnitModulusVector(std::move(v));
    }

    Eigen::Index size() const { return entries_.size(); }
    const CVector<Real> &values() const { return entries_; }
    Complex<Real> operator()(Eigen::Index m) const { return entries_(m); }

    RVector<Real> phases() const
    {
        RVector<Real> p(size());
        for (Eigen::Index m = 0; m < size(); ++m)
            p(m) = std::arg(entries_(m));
        return p;
    }

    UnitModulusVector rotated(Real phase) const
    {
        return UnitModulusVector((entries_ * std::polar(Real(1), phase)).eval());
    }

  private:
    CVector<Real> entries_;
};

template <typename Real = double>
struct TangentVector
{
    CVector<Real> entries;
    CVector<Real> base_point;

    Real norm() const { return entries.norm(); }
};

// max_m |Re[x_m conj(theta_m)]| / max(1, max_m |x_m|). Rounding leaves an
// absolute residual of order eps * |x|, so large gradients are measured
// relative to their own magnitude.
template <typename Real>
Real tangency_residual(const CVector<Real> &base, const CVector<Real> &x)
{
    if (x.size() == 0)
        return Real(0);
    const Real scale = std::max(Real(1), x.cwiseAbs().maxCoeff());
    return x.cwiseProduct(base.conjugate()).real().cwiseAbs().maxCoeff() / scale;
}

// P_theta(d) = d - Re[d o conj(theta)] o theta
template <typename Real>
TangentVector<Real> project_tangent(const UnitModulusVector<Real> &base, const CVector<Real> &d)
{
    if (d.size() != base.size())
        throw std::invalid_argument("project_tangent: dimension mismatch");
    const CVector<Real> &theta = base.values();
    const RVector<Real> radial = d.cwiseProduct(theta.conjugate()).real();
    TangentVector<Real> out;
    out.entries = d - (radial.template cast<Complex<Real>>().cwiseProduct(theta));
    out.base_point = theta;
    return out;
}

// Ret(x)_m = x_m / |x_m|
template <typename Real>
UnitModulusVector<Real> retract(const CVector<Real> &x)
{
    CVector<Real> out(x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m)
    {
        const Real r = std::abs(x(m));
        if (!(r >= Real(1e-14)))
            throw RetractionSingularity("retract: entry " + std::to_string(m) + " has (near-)zero magnitude");
        out(m) = x(m) / r;
    }
    return UnitModulusVector<Real>(std::move(out));
}

template <typename Real>
TangentVector<Real> riemannian_gradient(const UnitModulusVector<Real> &base, const CVector<Real> &euclid_grad)
{
    return project_tangent(base, euclid_grad);
}

struct ArmijoParams
{
    double initial_step = 1.0; // q
    double shrink = 0.5;       // l
    double sufficient_decrease = 1e-4; // gamma
    int max_halvings = 50;

    void validate() const
    {
        if (!(initial_step > 0.0))
            throw std::invalid_argument("ArmijoParams: initial step must be positive");
        if (!(shrink > 0.0 && shrink < 1.0))
            throw std::invalid_argument("ArmijoParams: shrink factor must lie in (0, 1)");
        if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
            throw std::invalid_argument("ArmijoParams: sufficient-decrease constant must lie in (0, 1)");
        if (max_halvings < 0)
            throw std::invalid_argument("ArmijoParams: max_halvings must be >= 0");
    }
};

template <typename Real>
struct ArmijoStep
{
    Real step;
    int halvings;
    UnitModulusVector<Real> point;
    Real cost;
};

// Smallest n >= 0 with J(theta) - J(Ret(theta + q l^n d)) >= -gamma q l^n Re[grad^H d].
template <typename Real, typename Cost>
ArmijoStep<Real> armijo_search(Cost &&cost, const UnitModulusVector<Real> &base, Real base_cost,
                               const TangentVector<Real> &direction, const TangentVector<Real> &grad,
                               const ArmijoParams &p)
{
    p.validate();
    const Real slope = real_inner(grad.entries, direction.entries);
    if (slope > Real(0))
        throw NotDescentDirection("armijo_search: direction is not a descent direction");

    Real step = static_cast<Real>(p.initial_step);
    for (int n = 0; n <= p.max_halvings; ++n, step *= static_cast<Real>(p.shrink))
    {
        UnitModulusVector<Real> trial = retract<Real>((base.values() + step * direction.entries).eval());
        const Real trial_cost = cost(trial.values());
        if (base_cost - trial_cost >= -static_cast<Real>(p.sufficient_decrease) * step * slope)
            return {step, n, std::move(trial), trial_cost};
    }
    throw LineSearchFailure("armijo_search: no acceptable step within max_halvings");
}

template <typename Real, typename Cost>
ArmijoStep<Real> armijo_search(Cost &&cost, const UnitModulusVector<Real> &base, const TangentVector<Real> &direction,
                               const TangentVector<Real> &grad, const ArmijoParams &p)
{
    return armijo_search(cost, base, static_cast<Real>(cost(base.values())), direction, grad, p);
}

struct RcgOptions
{
    ArmijoParams armijo;
    double grad_tol = 1e-6;
    double rel_cost_tol = 1e-8;
    int max_iters = 500;
};

enum class RcgStatus
{
    gradient_converged,
    cost_converged,
    max_iterations,
    line_search_warning // converged with warning: steepest descent could not make progress
};

template <typename Real>
struct RcgResult
{
    UnitModulusVector<Real> theta;
    std::vector<Real> cost_trace;
    RcgStatus status = RcgStatus::max_iterations;
    int iterations = 0;
    int direction_resets = 0;
    Real final_grad_norm = Real(0);
    Real max_tangency_residual = Real(0);
};

// Polak-Ribiere conjugate gradient on the circle manifold with Armijo steps.
//
// cost(theta) -> Real and euclid_grad(theta) -> CVector both take the raw
// coefficient vector. The PR parameter is clamped at zero, and the direction
// falls back to steepest descent whenever it fails the descent test or the
// line search fails along it.
template <typename Real, typename Cost, typename Grad>
RcgResult<Real> rcg_minimize(Cost &&cost, Grad &&euclid_grad, const UnitModulusVector<Real> &theta0,
                             const RcgOptions &opt = {})
{
    RcgResult<Real> res{theta0, {}, RcgStatus::max_iterations, 0, 0, Real(0), Real(0)};
    UnitModulusVector<Real> theta = theta0;
    Real j = cost(theta.values());
    res.cost_trace.push_back(j);

    TangentVector<Real> g = riemannian_gradient(theta, CVector<Real>(euclid_grad(theta.values())));
    res.max_tangency_residual = tangency_residual(theta.values(), g.entries);
    res.final_grad_norm = g.norm();
    if (g.norm() < static_cast<Real>(opt.grad_tol))
    {
        res.status = RcgStatus::gradient_converged;
        return res;
    }

    TangentVector<Real> d{(-g.entries).eval(), theta.values()};
    for (int t = 0; t < opt.max_iters; ++t)
    {
        bool steepest = false;
        if (real_inner(g.entries, d.entries) >= Real(0))
        {
            d.entries = -g.entries;
            steepest = true;
            ++res.direction_resets;
        }

        std::optional<ArmijoStep<Real>> step;
        try
        {
            step.emplace(armijo_search(cost, theta, j, d, g, opt.armijo));
        }
        catch (const LineSearchFailure &)
        {
            if (!steepest)
            {
                d.entries = -g.entries;
                ++res.direction_resets;
                try
                {
                    step.emplace(armijo_search(cost, theta, j, d, g, opt.armijo));
                }
                catch (const LineSearchFailure &)
                {
                }
            }
        }
        if (!step)
        {
            res.status = RcgStatus::line_search_warning;
            break;
        }

        UnitModulusVector<Real> next = std::move(step->point);
        const Real j_next = step->cost;
        TangentVector<Real> g_next = riemannian_gradient(next, CVector<Real>(euclid_grad(next.values())));
        res.max_tangency_residual =
            std::max(res.max_tangency_residual, tangency_residual(next.values(), g_next.entries));

        const TangentVector<Real> g_moved = project_tangent(next, g.entries);
        const TangentVector<Real> d_moved = project_tangent(next, d.entries);
        const Real g_norm2 = g.entries.squaredNorm();
        Real beta = real_inner(g_next.entries, (g_next.entries - g_moved.entries).eval()) / g_norm2;
        beta = std::max(beta, Real(0));

        d.entries = -g_next.entries + beta * d_moved.entries;
        d.base_point = next.values();

        const Real rel_change = std::abs(j - j_next) / std::max(std::abs(j), std::numeric_limits<Real>::min());
        theta = std::move(next);
        g = std::move(g_next);
        j = j_next;
        res.cost_trace.push_back(j);
        res.iterations = t + 1;
        res.final_grad_norm = g.norm();

        if (g.norm() < static_cast<Real>(opt.grad_tol))
        {
            res.status = RcgStatus::gradient_converged;
            break;
        }
        if (rel_change < static_cast<Real>(opt.rel_cost_tol))
        {
            res.status = RcgStatus::cost_converged;
            break;
        }
    }
    res.theta = std::move(theta);
    return res;
}

} // namespace risbc::manifold

#endif
