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

#include "experiments.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <tuple>

namespace risbc::harness
{

namespace
{

constexpr double deg = std::numbers::pi / 180.0;
using cd = std::complex<double>;

pattern::TargetPattern make_target(const ScenarioConfig &cfg, const pattern::ChannelStats<double> &stats, double lo,
                                   double hi)
{
    const double eps = cfg.target.rolloff;
    double fm = 0.0;
    if (cfg.target.flat_power)
        fm = *cfg.target.flat_power;
    else
        fm = synthesis::energy_flat_power(stats, pattern::TargetPattern::covering(lo, hi, 1.0, 0.0, eps),
                                          cfg.target.flat_power_efficiency);
    return pattern::TargetPattern::covering(lo, hi, fm, cfg.target.sidelobe_ratio * fm, eps);
}

SynthesisProblem problem_from_paths(const ScenarioConfig &cfg, channel::PathSet<double> paths, int num_ris,
                                    double lo, double hi)
{
    const pattern::AngularGrid grid{cfg.oversampling, num_ris};
    auto stats = pattern::channel_stats<double>(paths, {num_ris}, {cfg.num_bs});
    const pattern::TargetPattern t = make_target(cfg, stats, lo, hi);
    t.validate();
    pattern::validate_target_on_grid(t, grid);
    auto target = pattern::discretize<double>(t, grid);
    pattern::PatternModel<double> model(grid, std::move(stats));
    return {grid, std::move(paths), t, std::move(target), std::move(model)};
}

// Statistical CSI of a link: angles frozen at `paths`, gains and taps redrawn.
channel::ChannelConfig frozen_angles(const channel::ChannelConfig &c, const channel::PathSet<double> &paths)
{
    channel::ChannelConfig out = c;
    const auto &a = paths.arrival_angles();
    const auto &d = paths.departure_angles();
    out.arrival = channel::AngleDistribution::fixed_list({a.data(), a.data() + a.size()});
    out.departure = channel::AngleDistribution::fixed_list({d.data(), d.data() + d.size()});
    out.los_arrival.reset();
    out.los_departure.reset();
    return out;
}

channel::PathSet<double> single_path(double arrival, double departure)
{
    CVector<double> g(1);
    g(0) = cd(1.0, 0.0);
    RVector<double> a(1), d(1), p(1);
    a(0) = arrival;
    d(0) = departure;
    p(0) = 1.0;
    return channel::PathSet<double>(g, a, d, {0}, p);
}

double cp_factor_of(const ScenarioConfig &cfg)
{
    return static_cast<double>(cfg.num_subcarriers) / static_cast<double>(cfg.num_subcarriers + cfg.cp_length);
}

CVector<double> random_phases(Rng &rng, Eigen::Index m)
{
    CVector<double> v(m);
    for (Eigen::Index i = 0; i < m; ++i)
        v(i) = rng.unit_phasor();
    return v;
}

CMatrix<double> random_matrix(Rng &rng, Eigen::Index r, Eigen::Index c)
{
    CMatrix<double> w(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            w(i, j) = rng.circular_normal(1.0);
    return w;
}

int uniform_int(Rng &rng, int lo, int hi)
{
    return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
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
        const double dre = (fun(p) - fun(q)) / (2.0 * h);
        p = x;
        q = x;
        p(i) += cd(0.0, h);
        q(i) -= cd(0.0, h);
        const double dim = (fun(p) - fun(q)) / (2.0 * h);
        g(i) = cd(dre, dim);
    }
    return g;
}

double rel_err(const CVector<double> &analytic, const CVector<double> &ref)
{
    const double scale = ref.cwiseAbs().maxCoeff();
    return scale > 0.0 ? (analytic - ref).cwiseAbs().maxCoeff() / scale : (analytic - ref).cwiseAbs().maxCoeff();
}

} // namespace

SynthesisProblem make_synthesis_problem(const ScenarioConfig &cfg, std::uint64_t channel_seed)
{
    cfg.validate();
    return problem_from_paths(cfg, channel::sample_paths(cfg.bs_ris, channel_seed), cfg.num_ris,
                              cfg.target.coverage_deg.lo * deg, cfg.target.coverage_deg.hi * deg);
}

SynthesisProblem make_synthesis_problem(const ScenarioConfig &cfg)
{
    return make_synthesis_problem(cfg, derive_seed(cfg.seed, stream::bs_ris));
}

SynthesizeRun run_synthesize(const ScenarioConfig &cfg)
{
    SynthesisProblem p = make_synthesis_problem(cfg);
    auto res = synthesis::synthesize(p.model, p.target, cfg.weights, cfg.synthesis_options());
    return {std::move(p), std::move(res)};
}

BatchRun run_batch(const ScenarioConfig &cfg)
{
    const int n = cfg.batch_channels;
    BatchRun out{{cfg.oversampling, cfg.num_ris}, {}, {}, {}, {}, {}};
    const Eigen::Index size = out.grid.size();
    RMatrix<double> db(size, n), lin(size, n);
    const std::uint64_t base = derive_seed(cfg.seed, stream::bs_ris);
    for (int i = 0; i < n; ++i)
    {
        const SynthesisProblem p = make_synthesis_problem(cfg, derive_seed(base, static_cast<std::uint64_t>(i)));
        synthesis::SynthesisOptions o = cfg.synthesis_options();
        o.seed = derive_seed(o.seed, static_cast<std::uint64_t>(i));
        const auto r = synthesis::synthesize(p.model, p.target, cfg.weights, o);
        if (i == 0)
            out.target = p.target.values;
        lin.col(i) = r.achieved_pattern;
        for (Eigen::Index j = 0; j < size; ++j)
            db(j, i) = pattern::to_db(r.achieved_pattern(j));
        out.ripple_db.push_back(r.flat_top_ripple_db);
    }
    out.mean_linear = lin.rowwise().mean();
    out.mean_db = db.rowwise().mean();
    out.std_db.resize(size);
    for (Eigen::Index j = 0; j < size; ++j)
    {
        const double m = out.mean_db(j);
        const double var = n > 1 ? (db.row(j).array() - m).square().sum() / (n - 1) : 0.0;
        out.std_db(j) = std::sqrt(var);
    }
    return out;
}

std::vector<double> BroadcastRun::medians() const
{
    std::vector<double> m;
    for (const auto &r : rates)
        m.push_back(r.empty() ? std::nan("") : analysis::median(r));
    return m;
}

BroadcastRun run_broadcast_cdf(const ScenarioConfig &cfg)
{
    cfg.validate();
    if (cfg.broadcast.num_users == 0 || cfg.broadcast.num_realizations == 0)
    {
        BroadcastRun out;
        out.schemes = {"proposed", "random_phase", "no_ris", "no_ris_mrt"};
        out.rates.assign(out.schemes.size(), {});
        out.cp_factor = cp_factor_of(cfg);
        return out;
    }
    return run_broadcast_cdf(cfg, run_synthesize(cfg));
}

BroadcastRun run_broadcast_cdf(const ScenarioConfig &cfg, const SynthesizeRun &syn)
{
    cfg.validate();
    BroadcastRun out;
    out.schemes = {"proposed", "random_phase", "no_ris", "no_ris_mrt"};
    out.rates.assign(out.schemes.size(), {});
    out.cp_factor = cp_factor_of(cfg);
    const int users = cfg.broadcast.num_users;
    const int reals = cfg.broadcast.num_realizations;
    if (users == 0 || reals == 0)
        return out;

    out.flat_top_ripple_db = syn.result.flat_top_ripple_db;
    const CVector<double> theta = syn.result.theta.values();
    const CMatrix<double> &w = syn.result.precoder.matrix();

    const analysis::LinkBudget b = cfg.link_budget();
    const double snr = b.snr();
    const double scale = out.cp_factor * (1.0 - cfg.overhead_fraction);
    const int nc = cfg.num_subcarriers;
    const auto bs = channel::bs_side(cfg.num_bs);
    const auto ris_in = channel::ris_incident_side(cfg.num_ris);
    const auto ris_out = channel::ris_reflect_side(cfg.num_ris);
    const auto ue = channel::ue_side(cfg.num_ue_antennas);

    const channel::ChannelConfig g_cfg = frozen_angles(cfg.bs_ris, syn.problem.bs_ris);
    channel::ChannelConfig h_cfg = cfg.ris_ue;
    if (!h_cfg.los_departure)
        h_cfg.los_departure =
            channel::AngleDistribution::uniform_over(cfg.target.coverage_deg.lo * deg, cfg.target.coverage_deg.hi * deg);
    const CMatrix<double> w_iso =
        CMatrix<double>::Identity(cfg.num_bs, cfg.num_bs) / std::sqrt(static_cast<double>(cfg.num_bs));

    for (auto &r : out.rates)
        r.reserve(static_cast<std::size_t>(users) * static_cast<std::size_t>(reals));
    const std::uint64_t fading = derive_seed(cfg.seed, stream::fading);
    const std::uint64_t user_seed = derive_seed(cfg.seed, stream::users);
    const std::uint64_t phase_seed = derive_seed(cfg.seed, stream::random_phase);
    for (int r = 0; r < reals; ++r)
    {
        const auto g_paths = channel::sample_paths(g_cfg, derive_seed(fading, static_cast<std::uint64_t>(r)));
        Rng phase_rng(derive_seed(phase_seed, static_cast<std::uint64_t>(r)));
        const CVector<double> theta_rand = random_phases(phase_rng, cfg.num_ris);
        std::vector<CMatrix<double>> g(static_cast<std::size_t>(std::min(users, nc)));
        for (std::size_t k = 0; k < g.size(); ++k)
            g[k] = channel::assemble_channel(g_paths, bs, ris_in, static_cast<int>(k), nc);
        for (int u = 0; u < users; ++u)
        {
            Rng rng(derive_seed(user_seed, static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(users) +
                                               static_cast<std::uint64_t>(u)));
            const auto h_paths = channel::sample_paths(h_cfg, rng);
            const auto d_paths = channel::sample_paths(cfg.direct, rng);
            const int k = u % nc;
            const CMatrix<double> h = channel::assemble_channel(h_paths, ris_out, ue, k, nc);
            const CMatrix<double> hd = channel::assemble_channel(d_paths, bs, ue, k, nc);
            const CMatrix<double> &gk = g[static_cast<std::size_t>(k)];
            out.rates[0].push_back(scale *
                                   analysis::log2det_rate(analysis::equivalent_channel(h, theta, gk, hd, b), w, snr));
            out.rates[1].push_back(
                scale * analysis::log2det_rate(analysis::equivalent_channel(h, theta_rand, gk, hd, b), w, snr));
            const CMatrix<double> hd_scaled = b.direct_amplitude() * hd;
            out.rates[2].push_back(scale * analysis::log2det_rate(hd_scaled, w_iso, snr));
            const CMatrix<double> gram = hd_scaled * hd_scaled.adjoint();
            Eigen::SelfAdjointEigenSolver<CMatrix<double>> es(gram, Eigen::EigenvaluesOnly);
            out.rates[3].push_back(scale * std::log2(1.0 + snr * es.eigenvalues().maxCoeff()));
        }
    }
    return out;
}

double idealized_flat_power(const ScenarioConfig &cfg, int num_ris, double lo_rad, double hi_rad)
{
    // lambda_max = 1 for a single unit-power LoS path.
    return cfg.target.flat_power_efficiency * 2.0 * cfg.num_bs * num_ris / (std::cos(lo_rad) - std::cos(hi_rad));
}

namespace
{

// Synthesized-pattern OFDMA: single LoS BS-RIS path, single-antenna users on
// interleaved subcarriers, MRT per subcarrier.
double synthesized_ofdma_rate(const ScenarioConfig &cfg, const CVector<double> &theta, double psi0, double phi0,
                              double k_db, const analysis::LinkBudget &b, Rng &rng)
{
    const int nc = cfg.num_subcarriers;
    const int m = cfg.ofdma.num_ris;
    const auto bs = channel::bs_side(cfg.num_bs);
    const auto ris_in = channel::ris_incident_side(m);
    const auto ris_out = channel::ris_reflect_side(m);
    const auto ue = channel::ue_side(1);
    channel::ChannelConfig g_cfg;
    g_cfg.num_paths = 1;
    g_cfg.k_factor_db = std::numeric_limits<double>::infinity();
    g_cfg.delay_spread_taps = cfg.cp_length;
    g_cfg.arrival = channel::AngleDistribution::fixed_list({phi0});
    g_cfg.departure = channel::AngleDistribution::fixed_list({psi0});
    channel::ChannelConfig h_cfg;
    h_cfg.num_paths = 1 + cfg.ofdma.num_nlos;
    h_cfg.k_factor_db = k_db;
    h_cfg.delay_spread_taps = cfg.cp_length;
    h_cfg.los_departure = channel::AngleDistribution::uniform_over(cfg.ofdma.coverage_deg.lo * deg,
                                                                   cfg.ofdma.coverage_deg.hi * deg);
    channel::ChannelConfig d_cfg;
    d_cfg.num_paths = cfg.ofdma.num_direct_paths;
    d_cfg.delay_spread_taps = cfg.cp_length;

    const auto g_paths = channel::sample_paths(g_cfg, rng);
    std::vector<CMatrix<double>> g(static_cast<std::size_t>(nc));
    for (int k = 0; k < nc; ++k)
        g[static_cast<std::size_t>(k)] = channel::assemble_channel(g_paths, bs, ris_in, k, nc);
    std::vector<analysis::UserChannel<double>> users(static_cast<std::size_t>(cfg.ofdma.num_users));
    for (auto &u : users)
    {
        const auto h_paths = channel::sample_paths(h_cfg, rng);
        const auto d_paths = channel::sample_paths(d_cfg, rng);
        for (int k = 0; k < nc; ++k)
        {
            u.ris_ue.push_back(channel::assemble_channel(h_paths, ris_out, ue, k, nc));
            u.direct.push_back(channel::assemble_channel(d_paths, bs, ue, k, nc));
        }
    }
    return analysis::ofdma_rate(theta, g, users, analysis::OfdmaAllocation::interleaved(cfg.ofdma.num_users, nc), b);
}

} // namespace

OfdmaRun run_ofdma_eval(const ScenarioConfig &cfg)
{
    cfg.validate();
    OfdmaRun out;
    const double lo = cfg.ofdma.coverage_deg.lo * deg;
    const double hi = cfg.ofdma.coverage_deg.hi * deg;
    out.flat_power = idealized_flat_power(cfg, cfg.ofdma.num_ris, lo, hi);
    out.cp_factor = cp_factor_of(cfg);
    out.overhead_fraction = cfg.overhead_fraction;
    const std::uint64_t base = derive_seed(cfg.seed, stream::ofdma);

    // Synthesized mode: one pattern for a LoS BS-RIS path, reused for every cell.
    std::optional<CVector<double>> theta;
    double psi0 = 0.0, phi0 = 0.0;
    if (cfg.ofdma.pattern == PatternMode::synthesized)
    {
        Rng rng(derive_seed(base, 0xFFFFull));
        phi0 = rng.uniform(0.0, std::numbers::pi);
        psi0 = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        ScenarioConfig c = cfg;
        c.target.flat_power = out.flat_power;
        const SynthesisProblem p = problem_from_paths(c, single_path(phi0, psi0), cfg.ofdma.num_ris, lo, hi);
        synthesis::SynthesisOptions o = c.synthesis_options();
        o.num_streams = 1;
        theta = synthesis::synthesize(p.model, p.target, c.weights, o).theta.values();
    }

    for (std::size_t ki = 0; ki < cfg.ofdma.k_factors_db.size(); ++ki)
    {
        const double k_db = cfg.ofdma.k_factors_db[ki];
        // Common random numbers across the power sweep.
        const std::uint64_t seed = derive_seed(base, ki);
        for (double p_dbm : cfg.ofdma.tx_dbm)
        {
            analysis::IdealizedSystem s;
            s.num_bs = cfg.num_bs;
            s.num_subcarriers = cfg.num_subcarriers;
            s.delay_spread_taps = cfg.cp_length;
            s.num_ue_antennas = 1;
            s.coverage = {lo, hi};
            s.flat_power = out.flat_power;
            s.k_factor_linear = db_to_linear(k_db);
            s.num_nlos = cfg.ofdma.num_nlos;
            s.num_direct_paths = cfg.ofdma.num_direct_paths;
            s.budget = cfg.link_budget(p_dbm);
            OfdmaCell cell;
            cell.k_factor_db = k_db;
            cell.tx_dbm = p_dbm;
            cell.analytic = analysis::analytic_ofdma_rate(s.stats(), s.budget, s.num_subcarriers, s.num_bs);
            analysis::MonteCarloSummary mc;
            if (theta)
            {
                std::vector<double> samples;
                for (int t = 0; t < cfg.ofdma.num_realizations; ++t)
                {
                    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
                    samples.push_back(synthesized_ofdma_rate(cfg, *theta, psi0, phi0, k_db, s.budget, rng));
                }
                mc = analysis::summarize(std::move(samples));
            }
            else
                mc = analysis::simulate_ofdma_rate(s, cfg.ofdma.num_realizations, seed);
            cell.numeric_mean = mc.mean;
            cell.numeric_std_error = mc.std_error;
            out.cells.push_back(cell);
        }
    }
    return out;
}

GradcheckRun run_gradcheck(const ScenarioConfig &cfg, bool corrupt)
{
    const auto &gc = cfg.gradcheck;
    GradcheckRun out;
    const std::uint64_t base = derive_seed(cfg.seed, stream::gradcheck);
    const double bias = corrupt ? 1.01 : 1.0;
    for (int i = 0; i < gc.num_instances; ++i)
    {
        Rng rng(derive_seed(base, static_cast<std::uint64_t>(i)));
        GradcheckRow row;
        row.num_ris = uniform_int(rng, 2, gc.max_ris);
        // A 1 x 1 precoder has an identically zero gradient (J is scale
        // invariant), which makes a relative error meaningless.
        row.num_bs = uniform_int(rng, std::min(2, gc.max_bs), gc.max_bs);
        row.num_paths = uniform_int(rng, 1, gc.max_paths);
        row.num_streams = uniform_int(rng, 1, row.num_bs);
        const int m = row.num_ris;

        CVector<double> gains(row.num_paths);
        RVector<double> arr(row.num_paths), dep(row.num_paths), pw(row.num_paths);
        for (int l = 0; l < row.num_paths; ++l)
        {
            pw(l) = 1.0 / row.num_paths;
            gains(l) = rng.circular_normal(pw(l));
            arr(l) = rng.uniform(0.0, std::numbers::pi);
            dep(l) = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        }
        const channel::PathSet<double> paths(gains, arr, dep, std::vector<int>(static_cast<std::size_t>(row.num_paths)),
                                             pw);
        const pattern::AngularGrid grid{4, m};
        const pattern::PatternModel<double> model(grid, pattern::channel_stats<double>(paths, {m}, {row.num_bs}));
        const CVector<double> theta = random_phases(rng, m);
        const CMatrix<double> w = random_matrix(rng, row.num_bs, row.num_streams);
        const double level = model.normalized_pattern(theta, w).mean();
        const double lo = rng.uniform(40.0, 90.0) * deg;
        const auto t = pattern::TargetPattern::covering(lo, lo + 50.0 * deg, 1.5 * level, 0.2 * level, 0.2);
        const auto target = pattern::discretize<double>(t, grid);
        const RVector<double> gamma =
            pattern::compute_weights(model.normalized_pattern(theta, w), target, cfg.weights);
        // Weights frozen at gamma, the setting of the analytic gradients.
        auto frozen = [&](const CVector<double> &th, const CMatrix<double> &ww) {
            return pattern::weighted_cost<double>(model.normalized_pattern(th, ww, false), target.values, gamma);
        };

        const CMatrix<double> gw = bias * synthesis::grad_precoder(w, theta, model, target.values, gamma);
        const CVector<double> wv = w.reshaped();
        const CVector<double> fd_w = fd_gradient(
            [&](const CVector<double> &v) { return frozen(theta, v.reshaped(w.rows(), w.cols())); }, wv, gc.fd_step);
        row.precoder_error = rel_err(CVector<double>(2.0 * gw.reshaped()), fd_w);

        const CVector<double> gt = bias * synthesis::grad_theta(theta, w, model, target.values, gamma);
        const CVector<double> fd_t =
            fd_gradient([&](const CVector<double> &th) { return frozen(th, w); }, theta, gc.fd_step);
        row.phase_error = rel_err(CVector<double>(2.0 * gt), fd_t);

        // The phase gradient is the diagonal of the gradient with respect to an
        // unconstrained M x M matrix. J is quartic along every coordinate line,
        // so the five-point stencil is exact up to rounding.
        const CMatrix<double> at = pattern::grid_steering<double>(grid);
        const RVector<double> chi = model.excitation(w);
        const auto &ag = model.stats().ris_steering;
        const CMatrix<double> v = ag * chi.cast<cd>().asDiagonal() * ag.adjoint();
        const double c = model.scale() / w.squaredNorm();
        auto cost_full = [&](const CMatrix<double> &tt) {
            const CMatrix<double> x = at * tt;
            const RVector<double> ybar = c * (x * v).cwiseProduct(x.conjugate()).rowwise().sum().real();
            return pattern::weighted_cost<double>(ybar, target.values, gamma);
        };
        const double h = 1e-3;
        const CMatrix<double> diag = theta.asDiagonal();
        CVector<double> lemma(m);
        for (int r = 0; r < m; ++r)
        {
            auto deriv = [&](cd dir) {
                auto at_t = [&](double s) {
                    CMatrix<double> x = diag;
                    x(r, r) += s * dir;
                    return cost_full(x);
                };
                return (-at_t(2 * h) + 8 * at_t(h) - 8 * at_t(-h) + at_t(-2 * h)) / (12 * h);
            };
            lemma(r) = 0.5 * cd(deriv(cd(1.0, 0.0)), deriv(cd(0.0, 1.0)));
        }
        row.lemma_error = rel_err(gt, lemma);

        out.max_gradient_error = std::max({out.max_gradient_error, row.precoder_error, row.phase_error});
        out.max_lemma_error = std::max(out.max_lemma_error, row.lemma_error);
        out.rows.push_back(row);
    }
    out.passed = out.max_gradient_error < gc.threshold && out.max_lemma_error < 1e-8;
    return out;
}

bool BeamshiftRun::agrees() const
{
    if (!predicted || !measured)
        return !predicted && !measured;
    return std::abs(predicted->lo - measured->lo) <= bin && std::abs(predicted->hi - measured->hi) <= bin;
}

BeamshiftPattern make_beamshift_pattern(const ScenarioConfig &cfg, double phi0)
{
    const auto &bcfg = cfg.beamshift;
    ScenarioConfig c = cfg;
    c.target.flat_power = idealized_flat_power(cfg, bcfg.num_ris, bcfg.coverage_deg.lo * deg,
                                               bcfg.coverage_deg.hi * deg);
    const SynthesisProblem p = problem_from_paths(c, single_path(phi0, 0.0), bcfg.num_ris,
                                                  bcfg.coverage_deg.lo * deg, bcfg.coverage_deg.hi * deg);
    auto res = synthesis::synthesize(p.model, p.target, c.weights, c.synthesis_options());
    const double level = res.flat_top_mean;
    const auto region = synthesis::half_power_region<double>(res.achieved_pattern, p.grid, level, p.target_pattern.center);
    if (!region)
        throw std::runtime_error("beamshift: synthesized pattern has no -3 dB region around the coverage centre");
    return {p.grid, std::move(res), phi0, *region, level};
}

BeamshiftRun shift_pattern(const BeamshiftPattern &p, double phi1)
{
    BeamshiftRun out;
    out.phi0 = p.phi0;
    out.phi1 = phi1;
    out.original = p.original;
    out.bin = p.grid.spacing();
    out.ripple_db = p.result.flat_top_ripple_db;
    out.predicted = synthesis::predict_shifted_region(p.original, p.phi0, phi1);
    const int m = p.grid.num_ris_elements;
    const pattern::PatternModel<double> model(
        p.grid, pattern::channel_stats<double>(single_path(phi1, 0.0), {m}, {p.result.precoder.num_bs()}));
    const RVector<double> y = model.normalized_pattern(p.result.theta.values(), p.result.precoder.matrix());
    const double around =
        out.predicted ? 0.5 * (out.predicted->lo + out.predicted->hi) : 0.5 * (p.original.lo + p.original.hi);
    out.measured = synthesis::half_power_region<double>(y, p.grid, p.reference_level, around);
    return out;
}

BeamshiftRun run_beamshift(const ScenarioConfig &cfg)
{
    // Reject before synthesizing: the prediction needs the region in [90, 180] deg.
    if (cfg.beamshift.coverage_deg.lo < 90.0)
        throw synthesis::HypothesisViolation("beamshift: coverage must lie in [90, 180] deg");
    const BeamshiftPattern p = make_beamshift_pattern(cfg, cfg.beamshift.phi0_deg * deg);
    return shift_pattern(p, cfg.beamshift.phi1_deg * deg);
}

ScalingRun run_scaling_probe(const ScenarioConfig &cfg, const std::vector<std::uint64_t> &seeds)
{
    ScalingRun out;
    std::vector<analysis::ScalingCell> cells;
    for (int m : cfg.scaling.num_ris)
        for (const auto &r : cfg.scaling.coverage_deg)
            cells.push_back({m, r.lo * deg, r.hi * deg});
    channel::ChannelConfig link;
    link.num_paths = cfg.scaling.num_paths;
    link.delay_spread_taps = cfg.cp_length;
    for (std::uint64_t seed : seeds)
    {
        ScenarioConfig c = cfg;
        c.seed = seed;
        const auto paths = channel::sample_paths(link, derive_seed(seed, stream::bs_ris));
        auto make = [&](const analysis::ScalingCell &cell) {
            SynthesisProblem p = problem_from_paths(c, paths, cell.num_ris, cell.lo_rad, cell.hi_rad);
            const double fm = p.target_pattern.flat_power;
            return std::make_tuple(std::move(p.model), std::move(p.target), fm);
        };
        auto rows = analysis::power_scaling_probe(cells, make, c.weights, c.synthesis_options());
        for (auto &r : rows)
        {
            out.rows.push_back(r);
            out.seeds.push_back(seed);
        }
    }
    return out;
}

} // namespace risbc::harness
