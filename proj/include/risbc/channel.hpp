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

#ifndef RISBC_CHANNEL_HPP
#define RISBC_CHANNEL_HPP

// Geometric mmWave multipath channels for uniform linear arrays.
//
// A path set carries complex gains, angles on both ends of the link, and an
// integer delay tap per path. With a rectangular pulse of one sample, the
// N_c-point DFT of the tapped channel reduces to a per-path phase ramp
// delta[k] = alpha * exp(-j 2 pi k n / N_c), so the frequency-domain channel
// at subcarrier k is
//
//   H[k] = sqrt(N_tx N_rx) * sum_l delta_l[k] rx(arrival_l) tx(departure_l)^H
//        = sqrt(N_tx N_rx) * A_rx * Delta[k] * diag(alpha) * A_tx^H.

#include "risbc/rng.hpp"
#include "risbc/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace risbc::channel
{

struct ArrayGeometry
{
    Eigen::Index num_elements = 1;
    double element_spacing_over_wavelength = 0.5;

    void validate() const
    {
        if (num_elements < 1)
            throw std::invalid_argument("ArrayGeometry: num_elements must be >= 1");
        if (!(element_spacing_over_wavelength > 0.0) || !std::isfinite(element_spacing_over_wavelength))
            throw std::invalid_argument("ArrayGeometry: element spacing must be positive");
    }
};

// Phase progression of the array response vector.
//   arrival_cos_neg   exp(-j 2 pi m (rho/lambda) cos(angle))   RIS, impinging signal
//   arrival_cos_pos   exp(+j 2 pi m (rho/lambda) cos(angle))   RIS, reflected signal
//   departure_sin_neg exp(-j 2 pi m (rho/lambda) sin(angle))   BS and UE arrays
enum class Steering
{
    arrival_cos_neg,
    arrival_cos_pos,
    departure_sin_neg
};

struct ArraySide
{
    ArrayGeometry geometry;
    Steering steering = Steering::departure_sin_neg;
};

template <typename Real = double>
CVector<Real> steering_vector(const ArrayGeometry &geometry, Real angle, Steering convention)
{
    geometry.validate();
    if (!std::isfinite(static_cast<double>(angle)))
        throw std::invalid_argument("steering_vector: angle must be finite");

    const Eigen::Index n = geometry.num_elements;
    const Real spacing = static_cast<Real>(geometry.element_spacing_over_wavelength);
    Real sign = Real(-1);
    Real direction = std::cos(angle);
    switch (convention)
    {
    case Steering::arrival_cos_neg:
        break;
    case Steering::arrival_cos_pos:
        sign = Real(1);
        break;
    case Steering::departure_sin_neg:
        direction = std::sin(angle);
        break;
    }

    const Real scale = Real(1) / std::sqrt(static_cast<Real>(n));
    const Real step = sign * Real(2) * pi_v<Real> * spacing * direction;
    CVector<Real> v(n);
    for (Eigen::Index m = 0; m < n; ++m)
        v(m) = std::polar(scale, step * static_cast<Real>(m));
    return v;
}

// Columns are steering vectors for the given angles.
template <typename Real, typename Angles>
CMatrix<Real> steering_matrix(const ArrayGeometry &geometry, const Angles &angles, Steering convention)
{
    const auto count = static_cast<Eigen::Index>(angles.size());
    CMatrix<Real> out(geometry.num_elements, count);
    for (Eigen::Index i = 0; i < count; ++i)
        out.col(i) = steering_vector<Real>(geometry, static_cast<Real>(angles[i]), convention);
    return out;
}

// A sampled multipath channel. Immutable after construction.
template <typename Real = double>
class PathSet
{
  public:
    PathSet(CVector<Real> gains, RVector<Real> arrival_angles, RVector<Real> departure_angles,
            std::vector<int> tap_indices, RVector<Real> mean_powers)
        : gains_(std::move(gains)), arrival_(std::move(arrival_angles)), departure_(std::move(departure_angles)),
          taps_(std::move(tap_indices)), mean_powers_(std::move(mean_powers))
    {
        const Eigen::Index n = gains_.size();
        if (n < 1)
            throw std::invalid_argument("PathSet: at least one path is required");
        if (arrival_.size() != n || departure_.size() != n || static_cast<Eigen::Index>(taps_.size()) != n ||
            mean_powers_.size() != n)
            throw std::invalid_argument("PathSet: all per-path lists must have equal length");
        for (int t : taps_)
            if (t < 0)
                throw std::invalid_argument("PathSet: tap indices must be nonnegative");
        if ((mean_powers_.array() < Real(0)).any())
            throw std::invalid_argument("PathSet: mean powers must be nonnegative");
        if (std::abs(static_cast<double>(mean_powers_.sum()) - 1.0) > 1e-12)
            throw std::invalid_argument("PathSet: mean path powers must sum to 1");
    }

    Eigen::Index size() const { return gains_.size(); }
    const CVector<Real> &gains() const { return gains_; }
    const RVector<Real> &arrival_angles() const { return arrival_; }
    const RVector<Real> &departure_angles() const { return departure_; }
    const std::vector<int> &tap_indices() const { return taps_; }
    const RVector<Real> &mean_powers() const { return mean_powers_; }

    int max_tap() const { return *std::max_element(taps_.begin(), taps_.end()); }

    // Bitwise equality, used by the determinism contract.
    friend bool operator==(const PathSet &a, const PathSet &b)
    {
        auto same = [](const auto &x, const auto &y) { return x.size() == y.size() && (x.array() == y.array()).all(); };
        return same(a.gains_, b.gains_) && same(a.arrival_, b.arrival_) && same(a.departure_, b.departure_) &&
               a.taps_ == b.taps_ && same(a.mean_powers_, b.mean_powers_);
    }

  private:
    CVector<Real> gains_;
    RVector<Real> arrival_;
    RVector<Real> departure_;
    std::vector<int> taps_;
    RVector<Real> mean_powers_;
};

struct AngleDistribution
{
    enum class Kind
    {
        uniform,
        fixed
    };
    Kind kind = Kind::uniform;
    double lo = 0.0;
    double hi = std::numbers::pi;
    std::vector<double> values; // fixed: one angle per path

    static AngleDistribution uniform_over(double lo, double hi) { return {Kind::uniform, lo, hi, {}}; }
    static AngleDistribution fixed_list(std::vector<double> v) { return {Kind::fixed, 0.0, 0.0, std::move(v)}; }
};

enum class PowerProfile
{
    uniform,
    custom
};

struct ChannelConfig
{
    int num_paths = 1;
    // Rician split of path 0 against the rest; nullopt means pure NLoS and
    // +infinity puts all power on path 0.
    std::optional<double> k_factor_db;
    PowerProfile power_profile = PowerProfile::uniform;
    std::vector<double> custom_powers;
    int delay_spread_taps = 0;
    AngleDistribution arrival;
    AngleDistribution departure;
    // Optional overrides for path 0, e.g. to put the LoS path of a user inside the coverage sector.
    std::optional<AngleDistribution> los_arrival;
    std::optional<AngleDistribution> los_departure;

    void validate(std::optional<int> cp_length = std::nullopt) const
    {
        if (num_paths < 1)
            throw ConfigError("channel: num_paths must be >= 1");
        if (delay_spread_taps < 0)
            throw ConfigError("channel: delay_spread_taps must be >= 0");
        if (cp_length && delay_spread_taps > *cp_length)
            throw ConfigError("channel: delay_spread_taps exceeds the cyclic prefix length");
        if (k_factor_db)
        {
            if (std::isnan(*k_factor_db))
                throw ConfigError("channel: k_factor_db is NaN");
            if (std::isfinite(*k_factor_db) && num_paths == 1)
                throw ConfigError("channel: a finite K-factor needs at least one NLoS path");
            if (power_profile == PowerProfile::custom)
                throw ConfigError("channel: a custom power profile cannot be combined with a K-factor");
        }
        if (power_profile == PowerProfile::custom)
        {
            if (static_cast<int>(custom_powers.size()) != num_paths)
                throw ConfigError("channel: custom power profile length must equal num_paths");
            double s = 0.0;
            for (double p : custom_powers)
            {
                if (!(p >= 0.0))
                    throw ConfigError("channel: custom powers must be nonnegative");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-9)
                throw ConfigError("channel: custom power profile must sum to 1");
        }
        auto check_angles = [&](const AngleDistribution &a, const char *what, int count) {
            if (a.kind == AngleDistribution::Kind::fixed)
            {
                if (static_cast<int>(a.values.size()) != count)
                    throw ConfigError(std::string("channel: fixed ") + what + " angle list has wrong length");
            }
            else if (!(a.lo <= a.hi) || !std::isfinite(a.lo) || !std::isfinite(a.hi))
                throw ConfigError(std::string("channel: invalid ") + what + " angle range");
        };
        check_angles(arrival, "arrival", num_paths);
        check_angles(departure, "departure", num_paths);
        if (los_arrival)
            check_angles(*los_arrival, "LoS arrival", 1);
        if (los_departure)
            check_angles(*los_departure, "LoS departure", 1);
    }

    // Mean power per path implied by the profile and K-factor.
    std::vector<double> mean_powers() const
    {
        std::vector<double> p(static_cast<std::size_t>(num_paths));
        if (power_profile == PowerProfile::custom)
            return custom_powers;
        if (!k_factor_db)
        {
            std::fill(p.begin(), p.end(), 1.0 / num_paths);
            return p;
        }
        if (std::isinf(*k_factor_db) && *k_factor_db > 0)
        {
            std::fill(p.begin(), p.end(), 0.0);
            p[0] = 1.0;
            return p;
        }
        const double k = db_to_linear(*k_factor_db);
        p[0] = k / (k + 1.0);
        for (int i = 1; i < num_paths; ++i)
            p[static_cast<std::size_t>(i)] = 1.0 / ((k + 1.0) * (num_paths - 1));
        return p;
    }

    bool has_deterministic_los() const { return k_factor_db.has_value(); }
};

namespace detail
{
inline double draw_angle(const AngleDistribution &a, int index, Rng &rng)
{
    if (a.kind == AngleDistribution::Kind::fixed)
        return a.values[static_cast<std::size_t>(index)];
    return rng.uniform(a.lo, a.hi);
}
} // namespace detail

// Draw order per path i = 0..Q-1: arrival angle, departure angle, tap index,
// then the gain (one uniform for a deterministic-magnitude LoS phase, two for
// a circular Gaussian). Fixed angles consume no draws.
inline PathSet<double> sample_paths(const ChannelConfig &config, Rng &rng)
{
    config.validate();
    const int q = config.num_paths;
    const std::vector<double> powers = config.mean_powers();

    CVector<double> gains(q);
    RVector<double> arrival(q), departure(q), mean(q);
    std::vector<int> taps(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i)
    {
        const auto &arr = (i == 0 && config.los_arrival) ? *config.los_arrival : config.arrival;
        const auto &dep = (i == 0 && config.los_departure) ? *config.los_departure : config.departure;
        const int a_index = (i == 0 && config.los_arrival) ? 0 : i;
        const int d_index = (i == 0 && config.los_departure) ? 0 : i;
        arrival(i) = detail::draw_angle(arr, a_index, rng);
        departure(i) = detail::draw_angle(dep, d_index, rng);
        taps[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(config.delay_spread_taps) + 1));

        const double p = powers[static_cast<std::size_t>(i)];
        mean(i) = p;
        if (i == 0 && config.has_deterministic_los())
            gains(i) = std::sqrt(p) * rng.unit_phasor();
        else
            gains(i) = rng.circular_normal(p);
    }
    // Sum exactly to one so the PathSet invariant holds regardless of rounding in the profile.
    mean /= mean.sum();
    return PathSet<double>(std::move(gains), std::move(arrival), std::move(departure), std::move(taps),
                           std::move(mean));
}

inline PathSet<double> sample_paths(const ChannelConfig &config, std::uint64_t rng_seed)
{
    Rng rng(rng_seed);
    return sample_paths(config, rng);
}

// delta[k] = alpha * exp(-j 2 pi k tap / N_c)
template <typename Real>
Complex<Real> freq_gain(Complex<Real> path_gain, int tap_index, int k, int num_subcarriers)
{
    if (num_subcarriers < 1 || k < 0 || k >= num_subcarriers)
        throw std::invalid_argument("freq_gain: subcarrier index out of range");
    // Reduce k * tap modulo N_c before scaling so the phase stays exact for large products.
    const long long r = (static_cast<long long>(k) * tap_index) % num_subcarriers;
    const Real phase = Real(-2) * pi_v<Real> * static_cast<Real>(r) / static_cast<Real>(num_subcarriers);
    return path_gain * std::polar(Real(1), phase);
}

// Factored channel A_rx * Delta[k] * diag(alpha) * A_tx^H, with the array-gain
// scale sqrt(N_tx N_rx) kept separate.
template <typename Real>
struct FactoredChannel
{
    CMatrix<Real> rx_steering; // N_rx x L
    CVector<Real> phase_ramp;  // diag of Delta[k]
    CVector<Real> gains;       // diag of the gain matrix
    CMatrix<Real> tx_steering; // N_tx x L
    Real scale = Real(1);

    CMatrix<Real> matrix() const
    {
        return scale * rx_steering * phase_ramp.cwiseProduct(gains).asDiagonal() * tx_steering.adjoint();
    }
};

template <typename Real = double>
FactoredChannel<Real> factor_channel(const PathSet<Real> &paths, const ArraySide &tx, const ArraySide &rx, int k,
                                     int num_subcarriers)
{
    tx.geometry.validate();
    rx.geometry.validate();
    if (paths.max_tap() >= num_subcarriers)
        throw std::invalid_argument("factor_channel: tap index must be below the number of subcarriers");
    FactoredChannel<Real> f;
    f.rx_steering = steering_matrix<Real>(rx.geometry, paths.arrival_angles(), rx.steering);
    f.tx_steering = steering_matrix<Real>(tx.geometry, paths.departure_angles(), tx.steering);
    f.phase_ramp.resize(paths.size());
    for (Eigen::Index l = 0; l < paths.size(); ++l)
        f.phase_ramp(l) = freq_gain<Real>(Complex<Real>(1), paths.tap_indices()[static_cast<std::size_t>(l)], k,
                                          num_subcarriers);
    f.gains = paths.gains();
    f.scale = std::sqrt(static_cast<Real>(tx.geometry.num_elements * rx.geometry.num_elements));
    return f;
}

// Summed form: sqrt(N_tx N_rx) * sum_l delta_l[k] rx_l tx_l^H.
template <typename Real = double>
CMatrix<Real> assemble_channel(const PathSet<Real> &paths, const ArraySide &tx, const ArraySide &rx, int k,
                               int num_subcarriers)
{
    tx.geometry.validate();
    rx.geometry.validate();
    if (paths.max_tap() >= num_subcarriers)
        throw std::invalid_argument("assemble_channel: tap index must be below the number of subcarriers");
    const Real scale = std::sqrt(static_cast<Real>(tx.geometry.num_elements * rx.geometry.num_elements));
    CMatrix<Real> h = CMatrix<Real>::Zero(rx.geometry.num_elements, tx.geometry.num_elements);
    for (Eigen::Index l = 0; l < paths.size(); ++l)
    {
        const auto delta = freq_gain<Real>(paths.gains()(l), paths.tap_indices()[static_cast<std::size_t>(l)], k,
                                           num_subcarriers);
        const CVector<Real> r = steering_vector<Real>(rx.geometry, paths.arrival_angles()(l), rx.steering);
        const CVector<Real> t = steering_vector<Real>(tx.geometry, paths.departure_angles()(l), tx.steering);
        h.noalias() += (scale * delta) * r * t.adjoint();
    }
    return h;
}

// Per-subcarrier matrices of one link, all with the same dimensions.
template <typename Real = double>
struct FrequencyChannel
{
    std::vector<CMatrix<Real>> per_subcarrier;

    Eigen::Index rows() const { return per_subcarrier.empty() ? 0 : per_subcarrier.front().rows(); }
    Eigen::Index cols() const { return per_subcarrier.empty() ? 0 : per_subcarrier.front().cols(); }
    int num_subcarriers() const { return static_cast<int>(per_subcarrier.size()); }
};

template <typename Real = double>
FrequencyChannel<Real> frequency_channel(const PathSet<Real> &paths, const ArraySide &tx, const ArraySide &rx,
                                         int num_subcarriers)
{
    FrequencyChannel<Real> out;
    out.per_subcarrier.reserve(static_cast<std::size_t>(num_subcarriers));
    const FactoredChannel<Real> f0 = factor_channel(paths, tx, rx, 0, num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k)
    {
        FactoredChannel<Real> f = f0;
        for (Eigen::Index l = 0; l < paths.size(); ++l)
            f.phase_ramp(l) = freq_gain<Real>(Complex<Real>(1), paths.tap_indices()[static_cast<std::size_t>(l)],
                                              k, num_subcarriers);
        out.per_subcarrier.push_back(f.matrix());
    }
    return out;
}

// Standard link sides of the RIS-assisted downlink.
inline ArraySide bs_side(Eigen::Index n_bs) { return {{n_bs, 0.5}, Steering::departure_sin_neg}; }
inline ArraySide ue_side(Eigen::Index n_ue) { return {{n_ue, 0.5}, Steering::departure_sin_neg}; }
inline ArraySide ris_incident_side(Eigen::Index m) { return {{m, 0.5}, Steering::arrival_cos_neg}; }
inline ArraySide ris_reflect_side(Eigen::Index m) { return {{m, 0.5}, Steering::arrival_cos_pos}; }

// Large-scale fading for PL = 30 dB + 10 zeta log10(d), d in meters (>= 1 m reference).
inline double path_loss_linear(double distance_m, double exponent)
{
    if (!(distance_m >= 1.0) || !std::isfinite(distance_m))
        throw std::invalid_argument("path_loss_linear: distance must be at least the 1 m reference");
    const double pl_db = 30.0 + 10.0 * exponent * std::log10(distance_m);
    return std::pow(10.0, -0.1 * pl_db);
}

} // namespace risbc::channel

#endif
