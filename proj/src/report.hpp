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

#ifndef RISBC_HARNESS_REPORT_HPP
#define RISBC_HARNESS_REPORT_HPP

// Plot-ready CSV files and JSON run summaries. Every file written here is a
// function of (configuration, seed) only; wall time goes to timing.json.

#include "experiments.hpp"

#include <string>

namespace risbc::harness
{

// Creates `dir` if needed and writes summary.json with the run metadata,
// the canonical configuration and `payload_json`.
void write_summary(const std::string &dir, const std::string &command, const ScenarioConfig &cfg,
                   const std::string &payload_json);

void write_timing(const std::string &dir, double wall_seconds);

// pattern.csv, trace.csv, inner_trace.csv, result.json, summary.json
void write_synthesize(const std::string &dir, const ScenarioConfig &cfg, const SynthesizeRun &run);

// batch_pattern.csv, summary.json
void write_batch(const std::string &dir, const ScenarioConfig &cfg, const BatchRun &run);

// cdf.csv, summary.json
void write_broadcast(const std::string &dir, const ScenarioConfig &cfg, const BroadcastRun &run);

// rates.csv, analytic.txt, summary.json
void write_ofdma(const std::string &dir, const ScenarioConfig &cfg, const OfdmaRun &run);

// gradcheck.csv, summary.json
void write_gradcheck(const std::string &dir, const ScenarioConfig &cfg, const GradcheckRun &run);

// beamshift.txt, summary.json
void write_beamshift(const std::string &dir, const ScenarioConfig &cfg, const BeamshiftRun &run);

// scaling.csv, summary.json
void write_scaling(const std::string &dir, const ScenarioConfig &cfg, const ScalingRun &run);

// Human-readable one-line-per-fact renderings for the console.
std::string describe(const BeamshiftRun &run);
std::string describe(const GradcheckRun &run, double threshold);

} // namespace risbc::harness

#endif
