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

#ifndef RISBC_HARNESS_CONFIG_HPP
#define RISBC_HARNESS_CONFIG_HPP

// Scenario configuration: defaults, YAML loading with line-precise errors,
// presets, dotted overrides and a stable hash of the canonical form.

#include "risbc/analysis.hpp"
#include "risbc/channel.hpp"
#include "risbc/pattern.hpp"
#include "risbc/synthesis.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace risbc::harness
{

struct Point2
{
    double x = 0.0;
    double y = 0.0;
};

struct DegRange
{
    double lo = 0.0;
    double hi = 180.0;
};

struct TargetConfig
{
    DegRange coverage_deg{90.0, 140.0};
    double rolloff = 0.1;
    std::optional<double> flat_power; // nullopt: energy-based default
    double flat_power_efficiency = 0.5;
    double sidelobe_ratio = 0.01; // f_S / f_M
};

struct OptimizerConfig
{
    int num_starts = 3;
    int max_outer_iters = 50;
    double outer_rel_tol = 1e-4;
    int max_inner_iters = 500;
    double grad_tol = 1e-6;
    double rel_cost_tol = 1e-8;
    manifold::ArmijoParams armijo;
};

struct BroadcastConfig
{
    int num_users = 128;
    int num_realizations = 100;
};

enum class PatternMode
{
    idealized,
    synthesized
};

struct OfdmaConfig
{
    int num_ris = 200;
    DegRange coverage_deg{90.0, 120.0};
    std::vector<double> k_factors_db{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    std::vector<double> tx_dbm{10.0, 20.0, 30.0};
    int num_realizations = 1000;
    int num_nlos = 3;
    int num_direct_paths = 3;
    PatternMode pattern = PatternMode::idealized;
    int num_users = 4; // synthesized mode only
};

struct BeamshiftConfig
{
    double phi0_deg = 60.0;
    double phi1_deg = 70.0;
    int num_ris = 64;
    DegRange coverage_deg{100.0, 140.0};
};

struct ScalingConfig
{
    std::vector<int> num_ris{50, 100};
    std::vector<DegRange> coverage_deg{{60.0, 120.0}, {75.0, 105.0}};
    int num_paths = 1; // BS-RIS paths per cell
};

struct GradcheckConfig
{
    int num_instances = 20;
    int max_ris = 16;
    int max_bs = 8;
    int max_paths = 4;
    double fd_step = 1e-6;
    double threshold = 1e-4;
};

struct ScenarioConfig
{
    std::uint64_t seed = 1;
    std::string preset = "ci";

    Point2 bs{0.0, 0.0};
    Point2 ris{190.0, 10.0};
    Point2 user{200.0, 0.0};

    int num_bs = 64;
    int num_ris = 100;
    int num_ue_antennas = 4;
    int num_streams = 4;

    int num_subcarriers = 64;
    int cp_length = 8;

    double tx_dbm = 20.0;
    double noise_dbm = -80.0;

    double ple_bs_ris = 2.0;
    double ple_ris_ue = 2.2;
    double ple_bs_ue = 3.5;

    channel::ChannelConfig bs_ris;
    channel::ChannelConfig ris_ue;
    channel::ChannelConfig direct;

    TargetConfig target;
    pattern::WeightConfig weights;
    int oversampling = 10;
    OptimizerConfig optimizer;

    BroadcastConfig broadcast;
    OfdmaConfig ofdma;
    int batch_channels = 50;
    BeamshiftConfig beamshift;
    ScalingConfig scaling;
    GradcheckConfig gradcheck;

    double overhead_fraction = 0.0;

    ScenarioConfig();

    void validate() const;

    // Fading factors from the geometry and path-loss exponents, power from tx_dbm.
    analysis::LinkBudget link_budget() const;
    analysis::LinkBudget link_budget(double tx_dbm_override) const;
    synthesis::SynthesisOptions synthesis_options() const;
};

// Applies the named preset's trial counts ("ci" or "paper").
void apply_preset(ScenarioConfig &cfg, const std::string &name);

// Loads YAML over `base` (the defaults unless given). Errors carry
// "<source>:<line>:<col>:".
ScenarioConfig load_config_file(const std::string &path, const ScenarioConfig &base = {});
ScenarioConfig load_config_string(const std::string &yaml, const std::string &source = "<string>",
                                  const ScenarioConfig &base = {});

// Applies "dotted.key=value" overrides (value parsed as YAML).
void apply_overrides(ScenarioConfig &cfg, const std::vector<std::string> &assignments);

// Canonical JSON text of the full configuration (sorted keys).
std::string canonical_json(const ScenarioConfig &cfg);

// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ScenarioConfig &cfg);

} // namespace risbc::harness

#endif
