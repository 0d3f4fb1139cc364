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

#ifndef RISBC_PATTERN_HPP
#define RISBC_PATTERN_HPP

// Flat-top target, oversampled angular grid, average reflected power pattern
// and the weighted least-squares cost.
//
// Conventions. X = A~ Theta A_G is the (kappa M) x L matrix of per-path array
// factors on the grid, chi_l = Lambda_l ||b_G(psi_l)^H W||^2 the per-path
// excitation, and
//     y_j = M^2 N_BS sum_l chi_l |X_jl|^2,      ybar = y / ||W||_F^2,
//     J   = sum_j gamma_j (f_j - ybar_j)^2.

#include "risbc/channel.hpp"
#include "risbc/types.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

namespace risbc::pattern
{

enum class Region
{
    flat,     // A1
    sidelobe, // A2
    rolloff,  // A3
};

struct TargetPattern
{
    double flat_power = 1.0;     // f_M
    double sidelobe_power = 0.0; // f_S
    double center = 0.0;         // radians
    double half_width = 0.0;     // radians
    double rolloff = 0.1;        // epsilon in [0, 1)

    // Flat-top from an angular interval [lo, hi] (radians).
    static TargetPattern covering(double lo, double hi, double flat_power, double sidelobe_power, double rolloff = 0.1)
    {
        return {flat_power, sidelobe_power, 0.5 * (lo + hi), 0.5 * (hi - lo), rolloff};
    }

    double flat_lo() const { return center - half_width * (1.0 - rolloff); }
    double flat_hi() const { return center + half_width * (1.0 - rolloff); }
    double outer_lo() const { return center - half_width * (1.0 + rolloff); }
    double outer_hi() const { return center + half_width * (1.0 + rolloff); }

    void validate() const
    {
        if (!std::isfinite(flat_power) || !std::isfinite(sidelobe_power) || !(sidelobe_power >= 0.0) ||
            !(flat_power > sidelobe_power))
            throw ConfigError("target: require flat_power > sidelobe_power >= 0");
        if (!(rolloff >= 0.0 && rolloff < 1.0))
            throw ConfigError("target: rolloff must lie in [0, 1)");
        if (!(half_width > 0.0) || !std::isfinite(center))
            throw ConfigError("target: half width must be positive");
        const double tol = 1e-12;
        if (outer_lo() < -tol || outer_hi() > pi_v<double> + tol)
            throw ConfigError("target: roll-off region extends outside [0, pi]");
    }

    Region region(double angle) const
    {
        const double d = std::abs(angle - center);
        if (d <= half_width * (1.0 - rolloff))
            return Region::flat;
        if (d <= half_width * (1.0 + rolloff))
            return Region::rolloff;
        return Region::sidelobe;
    }

    // Raised cosine mu(x) on A3.
    double value(double angle) const
    {
        switch (region(angle))
        {
        case Region::flat:
            return flat_power;
        case Region::sidelobe:
            return sidelobe_power;
        case Region::rolloff:
            break;
        }
        const double x =
            pi_v<double> * (std::abs(angle - center) - half_width * (1.0 - rolloff)) / (2.0 * rolloff * half_width);
        return 0.5 * (flat_power + sidelobe_power) + 0.5 * (flat_power - sidelobe_power) * std::cos(x);
    }
};

inline double target_value(const TargetPattern &t, double angle) { return t.value(angle); }

// phi_j = pi j / (kappa M), j = 0 .. kappa M - 1
struct AngularGrid
{
    int oversampling = 10;
    int num_ris_elements = 1;

    void validate() const
    {
        if (oversampling < 2)
            throw ConfigError("grid: oversampling factor must be an integer > 1");
        if (num_ris_elements < 1)
            throw ConfigError("grid: number of RIS elements must be >= 1");
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(oversampling) * num_ris_elements; }
    double spacing() const { return pi_v<double> / static_cast<double>(size()); }
    double angle(Eigen::Index j) const { return spacing() * static_cast<double>(j); }

    RVector<double> angles() const
    {
        RVector<double> a(size());
        for (Eigen::Index j = 0; j < size(); ++j)
            a(j) = angle(j);
        return a;
    }
};

// Rejects targets whose flat-top interval holds less than one grid bin.
inline void validate_target_on_grid(const TargetPattern &t, const AngularGrid &grid)
{
    t.validate();
    grid.validate();
    if (t.flat_hi() - t.flat_lo() < grid.spacing())
        throw ConfigError("target: flat-top region is narrower than one grid bin");
}

struct WeightConfig
{
    double flat = 10.0;     // gamma1
    double sidelobe = 1.0;  // gamma2
    double rolloff = 0.5;   // gamma3

    void validate() const
    {
        if (!(flat > 0.0) || !(sidelobe > 0.0) || !(rolloff > 0.0))
            throw ConfigError("weights: all region weights must be positive");
    }
};

// Target sampled on the grid.
template <typename Real = double>
struct DiscreteTarget
{
    RVector<Real> values;
    std::vector<Region> regions;

    Eigen::Index size() const { return values.size(); }
};

template <typename Real = double>
DiscreteTarget<Real> discretize(const TargetPattern &t, const AngularGrid &grid)
{
    DiscreteTarget<Real> d;
    d.values.resize(grid.size());
    d.regions.resize(static_cast<std::size_t>(grid.size()));
    for (Eigen::Index j = 0; j < grid.size(); ++j)
    {
        const double a = grid.angle(j);
        d.values(j) = static_cast<Real>(t.value(a));
        d.regions[static_cast<std::size_t>(j)] = t.region(a);
    }
    return d;
}

// gamma_j per region; sidelobe samples count only while above the target.
template <typename Real>
RVector<Real> compute_weights(const RVector<Real> &y, const DiscreteTarget<Real> &target, const WeightConfig &cfg)
{
    if (y.size() != target.size())
        throw std::invalid_argument("compute_weights: pattern and target sizes differ");
    RVector<Real> g(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j)
    {
        switch (target.regions[static_cast<std::size_t>(j)])
        {
        case Region::flat:
            g(j) = static_cast<Real>(cfg.flat);
            break;
        case Region::rolloff:
            g(j) = static_cast<Real>(cfg.rolloff);
            break;
        case Region::sidelobe:
            g(j) = y(j) > target.values(j) ? static_cast<Real>(cfg.sidelobe) : Real(0);
            break;
        }
    }
    return g;
}

template <typename Real>
RVector<Real> compute_weights(const RVector<Real> &y, const RVector<Real> &f, const TargetPattern &t,
                              const WeightConfig &cfg, const AngularGrid &grid)
{
    DiscreteTarget<Real> d = discretize<Real>(t, grid);
    if (f.size() != d.size())
        throw std::invalid_argument("compute_weights: target vector does not match the grid");
    d.values = f;
    return compute_weights(y, d, cfg);
}

// Second-order statistics of the BS-RIS channel that the pattern depends on.
template <typename Real = double>
struct ChannelStats
{
    CMatrix<Real> ris_steering; // A_G, M x L, a_G(phi_l)
    CMatrix<Real> bs_steering;  // B_G, N_BS x L, b_G(psi_l)
    RVector<Real> path_powers;  // diag(Lambda)

    Eigen::Index num_ris() const { return ris_steering.rows(); }
    Eigen::Index num_bs() const { return bs_steering.rows(); }
    Eigen::Index num_paths() const { return path_powers.size(); }

    void validate() const
    {
        if (ris_steering.cols() != path_powers.size() || bs_steering.cols() != path_powers.size())
            throw std::invalid_argument("ChannelStats: inconsistent path counts");
        if ((path_powers.array() < Real(0)).any())
            throw std::invalid_argument("ChannelStats: negative path power");
    }
};

template <typename Real = double>
ChannelStats<Real> channel_stats(const channel::PathSet<double> &bs_ris, const channel::ArrayGeometry &ris,
                                 const channel::ArrayGeometry &bs)
{
    ChannelStats<Real> s;
    s.ris_steering =
        channel::steering_matrix<Real>(ris, bs_ris.arrival_angles(), channel::Steering::arrival_cos_neg);
    s.bs_steering =
        channel::steering_matrix<Real>(bs, bs_ris.departure_angles(), channel::Steering::departure_sin_neg);
    s.path_powers = bs_ris.mean_powers().template cast<Real>();
    return s;
}

// A~, rows a_H(phi_j)^H.
template <typename Real = double>
CMatrix<Real> grid_steering(const AngularGrid &grid)
{
    grid.validate();
    const channel::ArrayGeometry g{grid.num_ris_elements};
    CMatrix<Real> a(grid.size(), grid.num_ris_elements);
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        a.row(j) = channel::steering_vector<Real>(g, static_cast<Real>(grid.angle(j)), channel::Steering::arrival_cos_pos)
                       .adjoint();
    return a;
}

// Pattern evaluator holding the grid steering matrix and channel statistics.
template <typename Real = double>
class PatternModel
{
  public:
    PatternModel(const AngularGrid &grid, ChannelStats<Real> stats)
        : grid_(grid), stats_(std::move(stats)), grid_steering_(grid_steering<Real>(grid))
    {
        stats_.validate();
        if (stats_.num_ris() != grid.num_ris_elements)
            throw std::invalid_argument("PatternModel: grid and channel disagree on M");
        const auto m = static_cast<Real>(stats_.num_ris());
        scale_ = m * m * static_cast<Real>(stats_.num_bs());
    }

    const AngularGrid &grid() const { return grid_; }
    const ChannelStats<Real> &stats() const { return stats_; }
    const CMatrix<Real> &grid_steering_matrix() const { return grid_steering_; }
    Real scale() const { return scale_; } // M^2 N_BS
    Eigen::Index num_samples() const { return grid_steering_.rows(); }

    // X = A~ Theta A_G. Gradient checks evaluate off the manifold and pass
    // enforce_unit_modulus = false.
    CMatrix<Real> array_factors(const CVector<Real> &theta, bool enforce_unit_modulus = true) const
    {
        check_theta(theta, enforce_unit_modulus);
        return grid_steering_ * (theta.asDiagonal() * stats_.ris_steering);
    }

    // chi_l = Lambda_l ||b_l^H W||^2
    RVector<Real> excitation(const CMatrix<Real> &w) const
    {
        if (w.rows() != stats_.num_bs())
            throw std::invalid_argument("PatternModel: precoder has wrong number of rows");
        return ((stats_.bs_steering.adjoint() * w).rowwise().squaredNorm().array() * stats_.path_powers.array())
            .matrix();
    }

    RVector<Real> pattern(const CMatrix<Real> &factors, const RVector<Real> &chi) const
    {
        return pattern_from_abs2(factors.cwiseAbs2(), chi);
    }

    RVector<Real> pattern_from_abs2(const RMatrix<Real> &factors_abs2, const RVector<Real> &chi) const
    {
        return scale_ * (factors_abs2 * chi);
    }

    RVector<Real> average_power_pattern(const CVector<Real> &theta, const CMatrix<Real> &w,
                                        bool enforce_unit_modulus = true) const
    {
        return pattern(array_factors(theta, enforce_unit_modulus), excitation(w));
    }

    RVector<Real> normalized_pattern(const CVector<Real> &theta, const CMatrix<Real> &w,
                                     bool enforce_unit_modulus = true) const
    {
        const Real n2 = w.squaredNorm();
        if (!(n2 > Real(0)))
            throw std::invalid_argument("normalized_pattern: zero precoder");
        return average_power_pattern(theta, w, enforce_unit_modulus) / n2;
    }

  private:
    void check_theta(const CVector<Real> &theta, bool enforce_unit_modulus) const
    {
        if (theta.size() != stats_.num_ris())
            throw std::invalid_argument("PatternModel: theta has wrong length");
        if (!enforce_unit_modulus)
            return;
        const Real tol = std::max(Real(1e-12), Real(64) * std::numeric_limits<Real>::epsilon());
        for (Eigen::Index m = 0; m < theta.size(); ++m)
            if (!(std::abs(std::abs(theta(m)) - Real(1)) <= tol))
                throw std::invalid_argument("PatternModel: theta entry " + std::to_string(m) + " is not unit-modulus");
    }

    AngularGrid grid_;
    ChannelStats<Real> stats_;
    CMatrix<Real> grid_steering_;
    Real scale_;
};

template <typename Real>
RVector<Real> average_power_pattern(const CVector<Real> &theta, const CMatrix<Real> &w, const ChannelStats<Real> &stats,
                                    const AngularGrid &grid)
{
    return PatternModel<Real>(grid, stats).average_power_pattern(theta, w);
}

template <typename Real>
RVector<Real> normalized_pattern(const CVector<Real> &theta, const CMatrix<Real> &w, const ChannelStats<Real> &stats,
                                 const AngularGrid &grid)
{
    return PatternModel<Real>(grid, stats).normalized_pattern(theta, w);
}

// sum_j gamma_j (f_j - ybar_j)^2
template <typename Real>
Real weighted_cost(const RVector<Real> &ybar, const RVector<Real> &f, const RVector<Real> &gamma)
{
    return (gamma.array() * (f - ybar).array().square()).sum();
}

// Cost with weights recomputed from the current pattern.
template <typename Real>
Real cost(const RVector<Real> &ybar, const DiscreteTarget<Real> &target, const WeightConfig &cfg)
{
    return weighted_cost(ybar, target.values, compute_weights(ybar, target, cfg));
}

template <typename Real>
Real cost(const CVector<Real> &theta, const CMatrix<Real> &w, const DiscreteTarget<Real> &target,
          const WeightConfig &cfg, const PatternModel<Real> &model, bool enforce_unit_modulus = true)
{
    return cost(model.normalized_pattern(theta, w, enforce_unit_modulus), target, cfg);
}

inline double to_db(double linear, double floor_db = -300.0)
{
    return linear > 0.0 ? std::max(10.0 * std::log10(linear), floor_db) : floor_db;
}

// CSV: angle_deg,gain_linear,gain_db,target_linear,target_db (dB floored at -300).
template <typename Real>
void write_pattern_csv(std::ostream &os, const AngularGrid &grid, const RVector<Real> &gain,
                       const RVector<Real> &target)
{
    if (gain.size() != grid.size() || target.size() != grid.size())
        throw std::invalid_argument("write_pattern_csv: size mismatch");
    os << "angle_deg,gain_linear,gain_db,target_linear,target_db\n";
    char buf[256];
    for (Eigen::Index j = 0; j < grid.size(); ++j)
    {
        const double g = static_cast<double>(gain(j));
        const double t = static_cast<double>(target(j));
        std::snprintf(buf, sizeof buf, "%.6f,%.12g,%.6f,%.12g,%.6f\n", grid.angle(j) * 180.0 / pi_v<double>, g,
                      to_db(g), t, to_db(t));
        os << buf;
    }
}

} // namespace risbc::pattern

#endif
