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

#include "report.hpp"

#include "json.hpp"

#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace risbc::harness
{

namespace
{

using nlohmann::json;
constexpr double rad2deg = 180.0 / std::numbers::pi;

std::string fmt(const char *f, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void write_file(const std::string &dir, const std::string &name, const std::string &content)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + p.string());
}

json region_json(const std::optional<synthesis::CoverageRegion> &r)
{
    if (!r)
        return nullptr;
    return {{"lo_deg", r->lo * rad2deg}, {"hi_deg", r->hi * rad2deg}};
}

template <typename T>
json vec_json(const std::vector<T> &v)
{
    return json(v);
}

} // namespace

void write_summary(const std::string &dir, const std::string &command, const ScenarioConfig &cfg,
                   const std::string &payload_json)
{
    json doc;
    doc["command"] = command;
    doc["seed"] = cfg.seed;
    doc["preset"] = cfg.preset;
    doc["config_hash"] = config_hash(cfg);
    doc["config"] = json::parse(canonical_json(cfg));
    doc["result"] = json::parse(payload_json);
    write_file(dir, "summary.json", doc.dump(2) + "\n");
}

void write_timing(const std::string &dir, double wall_seconds)
{
    write_file(dir, "timing.json", json{{"wall_seconds", wall_seconds}}.dump(2) + "\n");
}

void write_synthesize(const std::string &dir, const ScenarioConfig &cfg, const SynthesizeRun &run)
{
    const auto &r = run.result;
    std::ostringstream pat;
    pattern::write_pattern_csv(pat, run.problem.grid, r.achieved_pattern, run.problem.target.values);
    write_file(dir, "pattern.csv", pat.str());

    std::string trace = "iteration,cost\n";
    for (std::size_t i = 0; i < r.outer_cost_trace.size(); ++i)
        trace += fmt("%zu,%.12g\n", i, r.outer_cost_trace[i]);
    write_file(dir, "trace.csv", trace);

    std::string inner = "outer_iteration,block,inner_iteration,cost\n";
    for (std::size_t o = 0; o < r.precoder_cost_traces.size(); ++o)
    {
        for (std::size_t i = 0; i < r.precoder_cost_traces[o].size(); ++i)
            inner += fmt("%zu,precoder,%zu,%.12g\n", o + 1, i, r.precoder_cost_traces[o][i]);
        for (std::size_t i = 0; i < r.phase_cost_traces[o].size(); ++i)
            inner += fmt("%zu,phase,%zu,%.12g\n", o + 1, i, r.phase_cost_traces[o][i]);
    }
    write_file(dir, "inner_trace.csv", inner);

    json res;
    const RVector<double> phases = r.theta.phases();
    res["phases_rad"] = vec_json(std::vector<double>(phases.data(), phases.data() + phases.size()));
    const auto &w = r.precoder.matrix();
    json wre = json::array(), wim = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
    {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index j = 0; j < w.cols(); ++j)
        {
            rr.push_back(w(i, j).real());
            ri.push_back(w(i, j).imag());
        }
        wre.push_back(rr);
        wim.push_back(ri);
    }
    res["precoder"] = {{"rows", w.rows()}, {"cols", w.cols()}, {"real", wre}, {"imag", wim}};
    res["outer_cost_trace"] = vec_json(r.outer_cost_trace);
    res["start_costs"] = vec_json(r.start_costs);
    res["start_index"] = r.start_index;
    res["start_seed"] = r.start_seed;
    res["flat_top_ripple_db"] = r.flat_top_ripple_db;
    res["flat_top_mean"] = r.flat_top_mean;
    res["target_flat_power"] = run.problem.target_pattern.flat_power;
    res["line_search_warnings"] = r.warnings;
    write_file(dir, "result.json", res.dump(2) + "\n");

    json payload = {{"flat_top_ripple_db", r.flat_top_ripple_db},
                    {"flat_top_mean", r.flat_top_mean},
                    {"target_flat_power", run.problem.target_pattern.flat_power},
                    {"initial_cost", r.outer_cost_trace.front()},
                    {"final_cost", r.final_cost()},
                    {"outer_iterations", r.outer_cost_trace.size() - 1},
                    {"start_index", r.start_index},
                    {"line_search_warnings", r.warnings}};
    write_summary(dir, "synthesize", cfg, payload.dump());
}

void write_batch(const std::string &dir, const ScenarioConfig &cfg, const BatchRun &run)
{
    std::string csv = "angle_deg,mean_gain_db,std_gain_db,mean_gain_linear,target_db\n";
    for (Eigen::Index j = 0; j < run.grid.size(); ++j)
        csv += fmt("%.6f,%.6f,%.6f,%.12g,%.6f\n", run.grid.angle(j) * rad2deg, run.mean_db(j), run.std_db(j),
                   run.mean_linear(j), pattern::to_db(run.target(j)));
    write_file(dir, "batch_pattern.csv", csv);
    double worst = 0.0;
    for (double r : run.ripple_db)
        worst = std::max(worst, r);
    write_summary(dir, "synthesize --batch", cfg,
                  json{{"num_channels", run.ripple_db.size()}, {"ripple_db", run.ripple_db}, {"max_ripple_db", worst}}
                      .dump());
}

void write_broadcast(const std::string &dir, const ScenarioConfig &cfg, const BroadcastRun &run)
{
    std::string csv = "scheme,rate_bps_per_hz,cdf\n";
    for (std::size_t s = 0; s < run.schemes.size(); ++s)
        for (const auto &[x, p] : analysis::empirical_cdf(run.rates[s]))
            csv += fmt("%s,%.10g,%.10g\n", run.schemes[s].c_str(), x, p);
    write_file(dir, "cdf.csv", csv);
    json med = json::object();
    const auto m = run.medians();
    for (std::size_t s = 0; s < run.schemes.size(); ++s)
        med[run.schemes[s]] = run.rates[s].empty() ? json(nullptr) : json(m[s]);
    json payload = {{"samples_per_scheme", run.rates.empty() ? 0 : run.rates[0].size()},
                    {"cp_factor", run.cp_factor},
                    {"overhead_fraction", cfg.overhead_fraction},
                    {"median_rate_bps_per_hz", med},
                    {"flat_top_ripple_db", run.flat_top_ripple_db},
                    {"no_ris_strategy", "isotropic transmission W = I/sqrt(N_BS) without CSIT"},
                    {"no_ris_mrt_strategy", "dominant-eigenvector beamforming with instantaneous direct-link CSIT"}};
    write_summary(dir, "broadcast-cdf", cfg, payload.dump());
}

void write_ofdma(const std::string &dir, const ScenarioConfig &cfg, const OfdmaRun &run)
{
    std::string csv = "k_factor_db,tx_dbm,numeric_mean_bits,numeric_std_error_bits,analytic_bits,rel_error,"
                      "numeric_cp_adjusted_bits,analytic_cp_adjusted_bits\n";
    std::string txt;
    const double factor = run.cp_factor * (1.0 - run.overhead_fraction);
    for (const auto &c : run.cells)
    {
        csv += fmt("%.6g,%.6g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", c.k_factor_db, c.tx_dbm, c.numeric_mean,
                   c.numeric_std_error, c.analytic, c.rel_error(), factor * c.numeric_mean, factor * c.analytic);
        txt += fmt("K = %g dB, p = %g dBm: numeric %.4f, analytic %.4f bits per OFDM symbol (rel. error %.2f%%)\n",
                   c.k_factor_db, c.tx_dbm, c.numeric_mean, c.analytic, 100.0 * c.rel_error());
    }
    write_file(dir, "rates.csv", csv);
    write_file(dir, "analytic.txt", txt);
    json cells = json::array();
    for (const auto &c : run.cells)
        cells.push_back({{"k_factor_db", c.k_factor_db},
                         {"tx_dbm", c.tx_dbm},
                         {"numeric_mean", c.numeric_mean},
                         {"analytic", c.analytic},
                         {"rel_error", c.rel_error()}});
    write_summary(dir, "ofdma-eval", cfg,
                  json{{"flat_power", run.flat_power}, {"cp_factor", run.cp_factor}, {"cells", cells}}.dump());
}

void write_gradcheck(const std::string &dir, const ScenarioConfig &cfg, const GradcheckRun &run)
{
    std::string csv = "instance,num_ris,num_bs,num_paths,num_streams,precoder_rel_error,phase_rel_error,"
                      "diagonal_rel_error\n";
    for (std::size_t i = 0; i < run.rows.size(); ++i)
    {
        const auto &r = run.rows[i];
        csv += fmt("%zu,%d,%d,%d,%d,%.6e,%.6e,%.6e\n", i, r.num_ris, r.num_bs, r.num_paths, r.num_streams,
                   r.precoder_error, r.phase_error, r.lemma_error);
    }
    write_file(dir, "gradcheck.csv", csv);
    write_summary(dir, "gradcheck", cfg,
                  json{{"max_gradient_rel_error", run.max_gradient_error},
                       {"max_diagonal_rel_error", run.max_lemma_error},
                       {"threshold", cfg.gradcheck.threshold},
                       {"passed", run.passed}}
                      .dump());
}

void write_beamshift(const std::string &dir, const ScenarioConfig &cfg, const BeamshiftRun &run)
{
    write_file(dir, "beamshift.txt", describe(run));
    write_summary(dir, "beamshift", cfg,
                  json{{"phi0_deg", run.phi0 * rad2deg},
                       {"phi1_deg", run.phi1 * rad2deg},
                       {"original", region_json(run.original)},
                       {"predicted", region_json(run.predicted)},
                       {"measured", region_json(run.measured)},
                       {"bin_deg", run.bin * rad2deg},
                       {"agrees", run.agrees()}}
                      .dump());
}

void write_scaling(const std::string &dir, const ScenarioConfig &cfg, const ScalingRun &run)
{
    std::string csv = "seed,num_ris,lo_deg,hi_deg,target_flat_power,achieved_flat_mean,ripple_db\n";
    for (std::size_t i = 0; i < run.rows.size(); ++i)
    {
        const auto &r = run.rows[i];
        csv += fmt("%llu,%d,%.6f,%.6f,%.10g,%.10g,%.6f\n", static_cast<unsigned long long>(run.seeds[i]), r.num_ris,
                   r.lo_rad * rad2deg, r.hi_rad * rad2deg, r.target_flat_power, r.achieved_flat_mean, r.ripple_db);
    }
    write_file(dir, "scaling.csv", csv);
    write_summary(dir, "scaling-probe", cfg, json{{"rows", run.rows.size()}}.dump());
}

std::string describe(const BeamshiftRun &run)
{
    auto reg = [](const std::optional<synthesis::CoverageRegion> &r) {
        return r ? fmt("[%.4f, %.4f] deg", r->lo * rad2deg, r->hi * rad2deg) : std::string("empty");
    };
    std::string s;
    s += fmt("incidence: %.4f deg -> %.4f deg\n", run.phi0 * rad2deg, run.phi1 * rad2deg);
    s += "original -3 dB region: " + reg(run.original) + "\n";
    s += "predicted region: " + reg(run.predicted) + "\n";
    s += "measured -3 dB region: " + reg(run.measured) + "\n";
    s += fmt("grid bin: %.4f deg\n", run.bin * rad2deg);
    s += std::string("agreement within one bin: ") + (run.agrees() ? "yes" : "no") + "\n";
    return s;
}

std::string describe(const GradcheckRun &run, double threshold)
{
    return fmt("instances: %zu\nmax relative gradient error: %.3e (threshold %.1e)\n"
               "max diagonal-extraction error: %.3e (threshold 1e-08)\nresult: %s\n",
               run.rows.size(), run.max_gradient_error, threshold, run.max_lemma_error,
               run.passed ? "pass" : "FAIL");
}

} // namespace risbc::harness
