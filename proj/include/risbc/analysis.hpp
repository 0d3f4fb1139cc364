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

#ifndef RISBC_ANALYSIS_HPP
#define RISBC_ANALYSIS_HPP

// Downlink rates (broadcast log-det and OFDMA with MRT), closed-form received
// power and rate under an idealized flat-top pattern, and Monte Carlo
// simulators of that idealized system.

#include "risbc/channel.hpp"
#include "risbc/rng.hpp"
#include "risbc/synthesis.hpp"
#include "risbc/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <ostream>
#include <set>
#include <vector>

namespace risbc::analysis
{

struct LinkBudget
{
    double tx_power_w = 0.1;      // p
    double noise_power_w = 1e-11; // sigma_z^2
    double beta1 = 1.0;           // BS-RIS
    double beta2 = 1.0;           // RIS-UE
    double beta = 0.0;            // BS-UE, 0 models a blocked direct link

    void validate() const
    {
        if (!(tx_power_w >= 0.0) || !std::isfinite(tx_power_w))
            throw ConfigError("link budget: transmit power must be finite and >= 0");
        if (!(noise_power_w > 0.0) || !std::isfinite(noise_power_w))
            throw ConfigError("link budget: noise power must be positive");
        if (!(beta1 > 0.0) || !(beta2 > 0.0) || !(beta >= 0.0))
            throw ConfigError("link budget: fading factors must be positive (beta may be 0)");
    }

    double snr() const { return tx_power_w / noise_power_w; }
    double cascaded_amplitude() const { return std::sqrt(beta1 * beta2); }
    double direct_amplitude() const { return std::sqrt(beta); }
};

struct CoverageStats
{
    double k_factor_linear = 0.0;
    double beamwidth_rad = 0.0; // |A1|
    double flat_power = 0.0;    // f_M

    void validate() const
    {
        if (!(k_factor_linear >= 0.0))
            throw std::invalid_argument("CoverageStats: K must be >= 0");
        if (!(beamwidth_rad > 0.0 && beamwidth_rad <= pi_v<double>))
            throw std::invalid_argument("CoverageStats: beamwidth must lie in (0, pi]");
        if (!(flat_power >= 0.0))
            throw std::invalid_argument("CoverageStats: flat power must be >= 0");
    }

    // K/(K+1) + |A1| / (pi (K+1)); the K -> inf limit is 1.
    double in_coverage_fraction() const
    {
        if (std::isinf(k_factor_linear))
            return 1.0;
        const double k = k_factor_linear;
        return k / (k + 1.0) + beamwidth_rad / (pi_v<double> * (k + 1.0));
    }
};

// Average received power per antenna and subcarrier under the idealized pattern.
inline double avg_received_power(const CoverageStats &stats, const LinkBudget &b)
{
    stats.validate();
    b.validate();
    return b.tx_power_w * b.beta1 * b.beta2 * stats.flat_power * stats.in_coverage_fraction() + b.noise_power_w;
}

// Closed-form OFDMA rate in bits per OFDM symbol.
inline double analytic_ofdma_rate(const CoverageStats &stats, const LinkBudget &b, int num_subcarriers, int num_bs)
{
    stats.validate();
    b.validate();
    const double snr = b.snr();
    return num_subcarriers * std::log2(1.0 + snr * b.beta1 * b.beta2 * stats.flat_power * stats.in_coverage_fraction() +
                                       snr * b.beta * num_bs);
}

inline double cp_adjusted(double rate, int num_subcarriers, int cp_length)
{
    if (num_subcarriers < 1 || cp_length < 0)
        throw std::invalid_argument("cp_adjusted: invalid OFDM dimensions");
    return rate * static_cast<double>(num_subcarriers) / static_cast<double>(num_subcarriers + cp_length);
}

inline double overhead_adjusted(double rate, double overhead_fraction)
{
    if (!(overhead_fraction >= 0.0 && overhead_fraction < 1.0))
        throw std::invalid_argument("overhead_adjusted: overhead fraction must lie in [0, 1)");
    return rate * (1.0 - overhead_fraction);
}

// H_eq = sqrt(beta1 beta2) H Theta G + sqrt(beta) H_d
template <typename Real>
CMatrix<Real> equivalent_channel(const CMatrix<Real> &ris_ue, const CVector<Real> &theta, const CMatrix<Real> &bs_ris,
                                 const CMatrix<Real> &direct, const LinkBudget &b)
{
    if (ris_ue.cols() != theta.size() || bs_ris.rows() != theta.size() || direct.rows() != ris_ue.rows() ||
        direct.cols() != bs_ris.cols())
        throw std::invalid_argument("equivalent_channel: dimension mismatch");
    return static_cast<Real>(b.cascaded_amplitude()) * (ris_ue * theta.asDiagonal() * bs_ris) +
           static_cast<Real>(b.direct_amplitude()) * direct;
}

// log2 det(I + snr H W W^H H^H) via a Cholesky factor.
template <typename Real>
Real log2det_rate(const CMatrix<Real> &h, const CMatrix<Real> &w, Real snr)
{
    if (h.cols() != w.rows())
        throw std::invalid_argument("log2det_rate: dimension mismatch");
    if (!h.allFinite() || !w.allFinite())
        throw std::invalid_argument("log2det_rate: non-finite input");
    const CMatrix<Real> hw = h * w;
    CMatrix<Real> gram = CMatrix<Real>::Identity(h.rows(), h.rows());
    gram.noalias() += snr * hw * hw.adjoint();
    Eigen::LLT<CMatrix<Real>> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("log2det_rate: Gram matrix is not positive definite");
    Real s = Real(0);
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
        s += std::log2(llt.matrixL()(i, i).real());
    return Real(2) * s;
}

// sum_k log2 det(I + (p / sigma^2) H_eq[k] W[k] W[k]^H H_eq[k]^H)
template <typename Real>
Real broadcast_rate(const std::vector<CMatrix<Real>> &h_eq, const std::vector<CMatrix<Real>> &w, const LinkBudget &b)
{
    b.validate();
    if (h_eq.size() != w.size())
        throw std::invalid_argument("broadcast_rate: channel and precoder counts differ");
    double total_power = 0.0;
    for (const auto &wk : w)
        total_power += static_cast<double>(wk.squaredNorm());
    if (std::abs(total_power - static_cast<double>(w.size())) > 1e-9)
        throw std::invalid_argument("broadcast_rate: precoders must satisfy sum_k ||W[k]||_F^2 = N_c");
    Real r = Real(0);
    for (std::size_t k = 0; k < h_eq.size(); ++k)
        r += log2det_rate(h_eq[k], w[k], static_cast<Real>(b.snr()));
    return r;
}

// w = (sqrt(beta1 beta2) c + sqrt(beta) h_d) / ||.||, with c = G^H Theta^H h.
template <typename Real>
CVector<Real> mrt_precoder(const CVector<Real> &cascaded, const CVector<Real> &direct, const LinkBudget &b)
{
    if (cascaded.size() != direct.size())
        throw std::invalid_argument("mrt_precoder: dimension mismatch");
    const CVector<Real> v = static_cast<Real>(b.cascaded_amplitude()) * cascaded +
                            static_cast<Real>(b.direct_amplitude()) * direct;
    const Real n = v.norm();
    if (!(n > Real(0)) || !std::isfinite(static_cast<double>(n)))
        throw std::invalid_argument("mrt_precoder: zero combined channel");
    return v / n;
}

// Disjoint subcarrier sets per user.
struct OfdmaAllocation
{
    std::vector<std::vector<int>> subcarriers;

    void validate(int num_subcarriers) const
    {
        std::set<int> seen;
        for (const auto &set : subcarriers)
            for (int k : set)
            {
                if (k < 0 || k >= num_subcarriers)
                    throw std::invalid_argument("OfdmaAllocation: subcarrier index out of range");
                if (!seen.insert(k).second)
                    throw std::invalid_argument("OfdmaAllocation: subcarrier assigned twice");
            }
    }

    // Subcarrier k goes to user k mod U.
    static OfdmaAllocation interleaved(int num_users, int num_subcarriers)
    {
        if (num_users < 1)
            throw std::invalid_argument("OfdmaAllocation: need at least one user");
        OfdmaAllocation a;
        a.subcarriers.resize(static_cast<std::size_t>(num_users));
        for (int k = 0; k < num_subcarriers; ++k)
            a.subcarriers[static_cast<std::size_t>(k % num_users)].push_back(k);
        return a;
    }
};

// Single-antenna user: RIS-UE rows h_u^H[k] (1 x M) and direct rows h_du^H[k] (1 x N_BS).
template <typename Real = double>
struct UserChannel
{
    std::vector<CMatrix<Real>> ris_ue;
    std::vector<CMatrix<Real>> direct;
};

// sum_u sum_{k in K_u} log2(1 + snr ||sqrt(beta1 beta2) h_u^H Theta G0 + sqrt(beta) h_du^H||^2)
template <typename Real>
Real ofdma_rate(const CVector<Real> &theta, const std::vector<CMatrix<Real>> &bs_ris,
                const std::vector<UserChannel<Real>> &users, const OfdmaAllocation &alloc, const LinkBudget &b)
{
    b.validate();
    const int nc = static_cast<int>(bs_ris.size());
    alloc.validate(nc);
    if (alloc.subcarriers.size() > users.size())
        throw std::invalid_argument("ofdma_rate: allocation names more users than channels supplied");
    Real r = Real(0);
    for (std::size_t u = 0; u < alloc.subcarriers.size(); ++u)
        for (int k : alloc.subcarriers[u])
        {
            const auto &uc = users[u];
            if (static_cast<int>(uc.ris_ue.size()) != nc || static_cast<int>(uc.direct.size()) != nc)
                throw std::invalid_argument("ofdma_rate: user channel has wrong subcarrier count");
            const CMatrix<Real> h = equivalent_channel(uc.ris_ue[static_cast<std::size_t>(k)], theta,
                                                       bs_ris[static_cast<std::size_t>(k)],
                                                       uc.direct[static_cast<std::size_t>(k)], b);
            r += std::log2(Real(1) + static_cast<Real>(b.snr()) * h.squaredNorm());
        }
    return r;
}

// Per-cell result of the flat-top power scaling experiment.
struct ScalingRow
{
    int num_ris = 0;
    double lo_rad = 0.0;
    double hi_rad = 0.0;
    double target_flat_power = 0.0;
    double achieved_flat_mean = 0.0;
    double ripple_db = 0.0;
};

struct ScalingCell
{
    int num_ris;
    double lo_rad;
    double hi_rad;
};

// Runs the synthesizer once per cell. `make_problem(cell)` returns a tuple-like
// {PatternModel, DiscreteTarget, target flat power}.
template <typename MakeProblem>
std::vector<ScalingRow> power_scaling_probe(const std::vector<ScalingCell> &cells, MakeProblem &&make_problem,
                                            const pattern::WeightConfig &weights,
                                            const synthesis::SynthesisOptions &opts)
{
    std::vector<ScalingRow> rows;
    for (const auto &c : cells)
    {
        auto [model, target, flat_power] = make_problem(c);
        const auto res = synthesis::synthesize(model, target, weights, opts);
        rows.push_back({c.num_ris, c.lo_rad, c.hi_rad, flat_power, static_cast<double>(res.flat_top_mean),
                        static_cast<double>(res.flat_top_ripple_db)});
    }
    return rows;
}

// Idealized system used to check the closed forms: the RIS reflects gain
// f_M to every path inside the coverage and nothing outside, the BS-RIS link
// is a single LoS path, and the first RIS-UE path is the LoS path toward a user
// inside the coverage.
struct IdealizedSystem
{
    int num_bs = 64;
    int num_subcarriers = 64;
    int delay_spread_taps = 8;
    int num_ue_antennas = 1;
    synthesis::CoverageRegion coverage{pi_v<double> / 2.0, 2.0 * pi_v<double> / 3.0};
    double flat_power = 1.0;
    double k_factor_linear = 1.0; // LoS-to-NLoS ratio of the RIS-UE link
    int num_nlos = 3;
    int num_direct_paths = 3;
    LinkBudget budget;

    void validate() const
    {
        if (num_bs < 1 || num_subcarriers < 1 || delay_spread_taps < 0 || delay_spread_taps >= num_subcarriers ||
            num_ue_antennas < 1 || num_nlos < 0 || num_direct_paths < 1)
            throw ConfigError("idealized system: invalid dimensions");
        coverage.validate();
        if (!(flat_power >= 0.0) || !(k_factor_linear >= 0.0))
            throw ConfigError("idealized system: flat power and K must be >= 0");
        if (num_nlos == 0 && !std::isinf(k_factor_linear))
            throw ConfigError("idealized system: finite K needs NLoS paths");
        budget.validate();
    }

    CoverageStats stats() const { return {k_factor_linear, coverage.width(), flat_power}; }
};

namespace detail
{

struct IdealPath
{
    Complex<double> gain; // alpha, mean power per the K split
    double reflect_gain;  // sqrt(y(phi)), f_M inside the coverage else 0
    Complex<double> rx_phase_step; // exp(-j pi sin psi') per UE antenna
    int tap;
};

// Draw order per path: angle, UE-side angle, tap, gain, reflection phase.
inline std::vector<IdealPath> draw_ideal_paths(const IdealizedSystem &s, Rng &rng)
{
    const double k = s.k_factor_linear;
    const bool los_only = std::isinf(k);
    const double p_los = los_only ? 1.0 : k / (k + 1.0);
    const double p_nlos = los_only || s.num_nlos == 0 ? 0.0 : 1.0 / ((k + 1.0) * s.num_nlos);
    std::vector<IdealPath> paths;
    const int q = 1 + (los_only ? 0 : s.num_nlos);
    for (int i = 0; i < q; ++i)
    {
        const double phi =
            i == 0 ? rng.uniform(s.coverage.lo, s.coverage.hi) : rng.uniform(0.0, pi_v<double>);
        const double psi = rng.uniform(-pi_v<double> / 2.0, pi_v<double> / 2.0);
        const int tap = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s.delay_spread_taps) + 1));
        const Complex<double> gain =
            i == 0 ? std::sqrt(p_los) * rng.unit_phasor() : rng.circular_normal(p_nlos);
        const Complex<double> phase = rng.unit_phasor();
        const bool inside = phi >= s.coverage.lo && phi <= s.coverage.hi;
        paths.push_back({gain * phase, inside ? std::sqrt(s.flat_power) : 0.0,
                         std::polar(1.0, -pi_v<double> * std::sin(psi)), tap});
    }
    return paths;
}

} // namespace detail

struct MonteCarloSummary
{
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> samples;
};

inline MonteCarloSummary summarize(std::vector<double> samples)
{
    MonteCarloSummary s;
    const double n = static_cast<double>(samples.size());
    if (samples.empty())
        return s;
    double sum = 0.0;
    for (double x : samples)
        sum += x;
    s.mean = sum / n;
    double var = 0.0;
    for (double x : samples)
        var += (x - s.mean) * (x - s.mean);
    s.std_error = samples.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    s.samples = std::move(samples);
    return s;
}

// Received power averaged over UE antennas and subcarriers, one sample per
// trial; trial t uses the substream derive_seed(seed, t). The direct link is
// ignored.
inline MonteCarloSummary simulate_received_power(const IdealizedSystem &s, int trials, std::uint64_t seed)
{
    s.validate();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(trials, 0)));
    const double amp = std::sqrt(s.budget.tx_power_w * s.budget.beta1 * s.budget.beta2);
    for (int t = 0; t < trials; ++t)
    {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const auto paths = detail::draw_ideal_paths(s, rng);
        double acc = 0.0;
        for (int k = 0; k < s.num_subcarriers; ++k)
            for (int i = 0; i < s.num_ue_antennas; ++i)
            {
                Complex<double> r(0.0, 0.0);
                for (const auto &p : paths)
                    r += channel::freq_gain<double>(p.gain, p.tap, k, s.num_subcarriers) * p.reflect_gain *
                         std::pow(p.rx_phase_step, i);
                r = amp * r + rng.circular_normal(s.budget.noise_power_w);
                acc += std::norm(r);
            }
        out.push_back(acc / (static_cast<double>(s.num_subcarriers) * s.num_ue_antennas));
    }
    return summarize(std::move(out));
}

// OFDMA rate with MRT per subcarrier, one user occupying all N_c subcarriers
// (so the sample mean estimates the closed form directly). The BS-RIS LoS
// path has a uniform AoD; direct paths are equal-power Rayleigh with uniform
// AoDs and taps.
inline MonteCarloSummary simulate_ofdma_rate(const IdealizedSystem &s, int trials, std::uint64_t seed)
{
    s.validate();
    const channel::ArrayGeometry bs{s.num_bs};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(trials, 0)));
    const double snr = s.budget.snr();
    for (int t = 0; t < trials; ++t)
    {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const auto paths = detail::draw_ideal_paths(s, rng);
        const double psi0 = rng.uniform(-pi_v<double> / 2.0, pi_v<double> / 2.0);
        const CVector<double> b0 = channel::steering_vector<double>(bs, psi0, channel::Steering::departure_sin_neg);
        const int qd = s.num_direct_paths;
        CMatrix<double> bd(s.num_bs, qd);
        std::vector<Complex<double>> ad(static_cast<std::size_t>(qd));
        std::vector<int> td(static_cast<std::size_t>(qd));
        for (int i = 0; i < qd; ++i)
        {
            bd.col(i) = channel::steering_vector<double>(bs, rng.uniform(-pi_v<double> / 2.0, pi_v<double> / 2.0),
                                                         channel::Steering::departure_sin_neg);
            td[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s.delay_spread_taps) + 1));
            ad[static_cast<std::size_t>(i)] = rng.circular_normal(1.0 / qd);
        }
        double rate = 0.0;
        CVector<double> dk(qd);
        for (int k = 0; k < s.num_subcarriers; ++k)
        {
            Complex<double> c(0.0, 0.0);
            for (const auto &p : paths)
                c += channel::freq_gain<double>(p.gain, p.tap, k, s.num_subcarriers) * p.reflect_gain;
            for (int i = 0; i < qd; ++i)
                dk(i) = channel::freq_gain<double>(ad[static_cast<std::size_t>(i)], td[static_cast<std::size_t>(i)], k,
                                                   s.num_subcarriers);
            const CVector<double> h = s.budget.cascaded_amplitude() * c * b0 +
                                      s.budget.direct_amplitude() * std::sqrt(static_cast<double>(s.num_bs)) * (bd * dk);
            rate += std::log2(1.0 + snr * h.squaredNorm());
        }
        out.push_back(rate);
    }
    return summarize(std::move(out));
}

// Empirical CDF pairs (value, P[X <= value]) of sorted samples.
inline std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(samples.size());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        cdf.emplace_back(samples[i], static_cast<double>(i + 1) / n);
    return cdf;
}

inline double median(std::vector<double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("median: empty sample");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

} // namespace risbc::analysis

#endif
