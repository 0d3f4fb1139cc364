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

// risbc command-line front end.

#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace risbc;
using namespace risbc::harness;

namespace
{

struct Common
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<std::string> preset;
    std::optional<double> overhead_fraction;
    std::vector<std::string> overrides;
};

ScenarioConfig resolve(const Common &c)
{
    ScenarioConfig base;
    if (c.preset)
        apply_preset(base, *c.preset);
    ScenarioConfig cfg = c.config_path.empty() ? base : load_config_file(c.config_path, base);
    if (c.preset)
        apply_preset(cfg, *c.preset);
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.overhead_fraction)
        cfg.overhead_fraction = *c.overhead_fraction;
    apply_overrides(cfg, c.overrides);
    cfg.validate();
    return cfg;
}

std::string out_dir(const Common &c, const std::string &command)
{
    return c.out_dir.empty() ? "risbc_out/" + command : c.out_dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"risbc: flat-top RIS broad-coverage synthesis and downlink rate evaluation"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--config", common.config_path, "YAML scenario file (defaults reproduce the reference scenario)");
    app.add_option("--seed", common.seed, "Scenario seed (overrides the file)");
    app.add_option("--out", common.out_dir, "Output directory");
    app.add_option("--preset", common.preset, "Trial-count preset")->check(CLI::IsMember({"ci", "paper"}));
    app.add_option("--overhead-fraction", common.overhead_fraction, "Fraction of the coherence time spent on estimation")
        ->check(CLI::Range(0.0, 0.999999));
    app.add_option("--set", common.overrides, "Override a configuration key, e.g. --set arrays.num_ris=64")
        ->take_all();

    auto *syn = app.add_subcommand("synthesize", "Synthesize the flat-top pattern (pattern.csv, trace.csv)");
    std::optional<double> assert_ripple;
    bool batch = false;
    syn->add_option("--assert-ripple-db", assert_ripple, "Exit 1 if the flat-top ripple exceeds this value");
    syn->add_flag("--batch", batch, "Synthesize over batch.num_channels channel draws and report mean/std per angle");

    auto *bc = app.add_subcommand("broadcast-cdf", "Broadcast downlink rate CDFs (cdf.csv)");
    auto *of = app.add_subcommand("ofdma-eval", "OFDMA rate: Monte Carlo against the closed form (rates.csv)");

    auto *gc = app.add_subcommand("gradcheck", "Finite-difference checks of the analytic gradients");
    bool corrupt = false;
    gc->add_flag("--corrupt-gradient", corrupt, "Negative control: perturb the analytic gradients")->group("");

    auto *bs = app.add_subcommand("beamshift", "Re-illuminate a synthesized pattern from a new incidence angle");
    std::optional<double> phi0, phi1;
    bs->add_option("--phi0", phi0, "Design incidence angle in degrees");
    bs->add_option("--phi1", phi1, "New incidence angle in degrees");

    auto *sp = app.add_subcommand("scaling-probe", "Flat-top level against array size and beamwidth");
    std::vector<std::uint64_t> seeds{1, 2, 3};
    sp->add_option("--seeds", seeds, "Seeds to repeat every cell with");

    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        ScenarioConfig cfg = resolve(common);
        if (syn->parsed())
        {
            const std::string dir = out_dir(common, "synthesize");
            if (batch)
            {
                const BatchRun run = run_batch(cfg);
                write_batch(dir, cfg, run);
                write_timing(dir, seconds_since(t0));
                double worst = 0.0;
                for (double r : run.ripple_db)
                    worst = std::max(worst, r);
                std::printf("channels: %zu, worst flat-top ripple: %.3f dB\n", run.ripple_db.size(), worst);
                return assert_ripple && worst > *assert_ripple ? 1 : 0;
            }
            const SynthesizeRun run = run_synthesize(cfg);
            write_synthesize(dir, cfg, run);
            write_timing(dir, seconds_since(t0));
            const auto &r = run.result;
            std::printf("flat-top ripple: %.3f dB\nflat-top mean: %.6g (target %.6g)\ncost: %.6g -> %.6g in %zu "
                        "outer iterations\nconfig hash: %s\n",
                        r.flat_top_ripple_db, r.flat_top_mean, run.problem.target_pattern.flat_power,
                        r.outer_cost_trace.front(), r.final_cost(), r.outer_cost_trace.size() - 1,
                        config_hash(cfg).c_str());
            if (assert_ripple && r.flat_top_ripple_db > *assert_ripple)
            {
                std::fprintf(stderr, "ripple %.3f dB exceeds the asserted %.3f dB\n", r.flat_top_ripple_db,
                             *assert_ripple);
                return 1;
            }
            return 0;
        }
        if (bc->parsed())
        {
            const std::string dir = out_dir(common, "broadcast-cdf");
            const BroadcastRun run = run_broadcast_cdf(cfg);
            write_broadcast(dir, cfg, run);
            write_timing(dir, seconds_since(t0));
            const auto med = run.medians();
            for (std::size_t s = 0; s < run.schemes.size(); ++s)
                std::printf("%-13s median %.4f bit/s/Hz over %zu users\n", run.schemes[s].c_str(), med[s],
                            run.rates[s].size());
            return 0;
        }
        if (of->parsed())
        {
            const std::string dir = out_dir(common, "ofdma-eval");
            const OfdmaRun run = run_ofdma_eval(cfg);
            write_ofdma(dir, cfg, run);
            write_timing(dir, seconds_since(t0));
            for (const auto &c : run.cells)
                std::printf("K = %6.1f dB  p = %5.1f dBm  numeric %9.3f  analytic %9.3f  rel. error %6.2f%%\n",
                            c.k_factor_db, c.tx_dbm, c.numeric_mean, c.analytic, 100.0 * c.rel_error());
            return 0;
        }
        if (gc->parsed())
        {
            const std::string dir = out_dir(common, "gradcheck");
            const GradcheckRun run = run_gradcheck(cfg, corrupt);
            write_gradcheck(dir, cfg, run);
            std::fputs(describe(run, cfg.gradcheck.threshold).c_str(), stdout);
            return run.passed ? 0 : 1;
        }
        if (bs->parsed())
        {
            if (phi0)
                cfg.beamshift.phi0_deg = *phi0;
            if (phi1)
                cfg.beamshift.phi1_deg = *phi1;
            cfg.validate();
            const std::string dir = out_dir(common, "beamshift");
            const BeamshiftRun run = run_beamshift(cfg);
            write_beamshift(dir, cfg, run);
            write_timing(dir, seconds_since(t0));
            std::fputs(describe(run).c_str(), stdout);
            return run.agrees() ? 0 : 1;
        }
        if (sp->parsed())
        {
            const std::string dir = out_dir(common, "scaling-probe");
            const ScalingRun run = run_scaling_probe(cfg, seeds);
            write_scaling(dir, cfg, run);
            write_timing(dir, seconds_since(t0));
            for (std::size_t i = 0; i < run.rows.size(); ++i)
            {
                const auto &r = run.rows[i];
                std::printf("seed %llu  M = %4d  [%.1f, %.1f] deg  target %.4g  achieved %.4g  ripple %.2f dB\n",
                            static_cast<unsigned long long>(run.seeds[i]), r.num_ris, r.lo_rad * 180.0 / std::numbers::pi,
                            r.hi_rad * 180.0 / std::numbers::pi, r.target_flat_power, r.achieved_flat_mean,
                            r.ripple_db);
            }
            return 0;
        }
    }
    catch (const synthesis::HypothesisViolation &e)
    {
        std::fprintf(stderr, "rejected: %s\n", e.what());
        return 2;
    }
    catch (const ConfigError &e)
    {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
