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

#ifndef RISBC_HARNESS_EXPERIMENTS_HPP
#define RISBC_HARNESS_EXPERIMENTS_HPP

// Seeded experiment drivers behind the CLI subcommands. Each driver is a pure
// function of the configuration; file output lives in report.hpp.

#include "config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace risbc::harness
{

// Named substreams of the scenario seed.
namespace stream
{
inline constexpr std::uint64_t bs_ris = 0x4253524953ull; // channel statistics
inline constexpr std::uint64_t fading = 0x46414445ull;   // per-realization fading
inline constexpr std::uint64_t users = 0x55534552ull;    // user channels
inline constexpr std::uint64_t random_phase = 0x524e44ull;
inline constexpr std::uint64_t ofdma = 0x4f46444dull;
inline constexpr std::uint64_t gradcheck = 0x47524144ull;
} // namespace stream

struct SynthesisProblem
{
    pattern::AngularGrid grid;
    channel::PathSet<double> bs_ris;
    pattern::TargetPattern target_pattern;
    pattern::DiscreteTarget<double> target;
    pattern::PatternModel<double> model;
};

// BS-RIS statistics drawn from `channel_seed`; flat level from the config or
// the energy bound.
SynthesisProblem make_synthesis_problem(const ScenarioConfig &cfg, std::uint64_t channel_seed);
SynthesisProblem make_synthesis_problem(const ScenarioConfig &cfg);

struct SynthesizeRun
{
    SynthesisProblem problem;
    synthesis::SynthesisResult<double> result;
};

SynthesizeRun run_synthesize(const ScenarioConfig &cfg);

// Fig. 4 style batch: one synthesis per BS-RIS channel draw.
struct BatchRun
{
    pattern::AngularGrid grid;
    RVector<double> target;      // target of the first channel, linear
    RVector<double> mean_db;     // per angle, over channels
    RVector<double> std_db;
    RVector<double> mean_linear;
    std::vector<double> ripple_db; // per channel
};

BatchRun run_batch(const ScenarioConfig &cfg);

// Broadcast rate CDFs, one rate per (realization, user).
struct BroadcastRun
{
    std::vector<std::string> schemes; // proposed, random_phase, no_ris, no_ris_mrt
    std::vector<std::vector<double>> rates;
    double cp_factor = 1.0;
    double flat_top_ripple_db = 0.0;

    std::vector<double> medians() const;
};

BroadcastRun run_broadcast_cdf(const ScenarioConfig &cfg);
// Reuses a synthesis of the same configuration.
BroadcastRun run_broadcast_cdf(const ScenarioConfig &cfg, const SynthesizeRun &syn);

// Closed-form OFDMA rate against Monte Carlo over the (K, p) sweep.
struct OfdmaCell
{
    double k_factor_db = 0.0;
    double tx_dbm = 0.0;
    double numeric_mean = 0.0;
    double numeric_std_error = 0.0;
    double analytic = 0.0;

    double rel_error() const { return std::abs(analytic - numeric_mean) / numeric_mean; }
};

struct OfdmaRun
{
    std::vector<OfdmaCell> cells;
    double flat_power = 0.0;
    double cp_factor = 1.0;
    double overhead_fraction = 0.0;
};

OfdmaRun run_ofdma_eval(const ScenarioConfig &cfg);

// Flat level of an idealized rectangular pattern over [lo, hi] from a single
// LoS BS-RIS path.
double idealized_flat_power(const ScenarioConfig &cfg, int num_ris, double lo_rad, double hi_rad);

// Finite-difference and diagonal-extraction checks of the analytic gradients.
struct GradcheckRow
{
    int num_ris = 0;
    int num_bs = 0;
    int num_paths = 0;
    int num_streams = 0;
    double precoder_error = 0.0;
    double phase_error = 0.0;
    double lemma_error = 0.0;
};

struct GradcheckRun
{
    std::vector<GradcheckRow> rows;
    double max_gradient_error = 0.0;
    double max_lemma_error = 0.0;
    bool passed = false;
};

// `corrupt` perturbs the analytic gradients so the check must fail.
GradcheckRun run_gradcheck(const ScenarioConfig &cfg, bool corrupt = false);

// Re-illumination of a pattern synthesized for incidence phi0 from phi1.
struct BeamshiftRun
{
    double phi0 = 0.0;
    double phi1 = 0.0;
    synthesis::CoverageRegion original;         // measured at phi0
    std::optional<synthesis::CoverageRegion> predicted;
    std::optional<synthesis::CoverageRegion> measured; // at phi1
    double bin = 0.0;
    double ripple_db = 0.0;

    bool agrees() const;
};

struct BeamshiftPattern
{
    pattern::AngularGrid grid;
    synthesis::SynthesisResult<double> result;
    double phi0 = 0.0;
    synthesis::CoverageRegion original;
    double reference_level = 0.0;
};

// Synthesizes the phi0 pattern once; shift_pattern() then evaluates any phi1.
BeamshiftPattern make_beamshift_pattern(const ScenarioConfig &cfg, double phi0);
BeamshiftRun shift_pattern(const BeamshiftPattern &p, double phi1);
BeamshiftRun run_beamshift(const ScenarioConfig &cfg);

// Flat-top level against array size and beamwidth, one row per (cell, seed).
struct ScalingRun
{
    std::vector<analysis::ScalingRow> rows;
    std::vector<std::uint64_t> seeds;
};

ScalingRun run_scaling_probe(const ScenarioConfig &cfg, const std::vector<std::uint64_t> &seeds);

} // namespace risbc::harness

#endif
