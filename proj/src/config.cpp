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

#include "config.hpp"

#include "json.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <limits>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace risbc::harness
{

namespace
{

constexpr double deg = std::numbers::pi / 180.0;

// Every configurable field is enumerated once, in visit_fields(). The loader
// and the JSON writer implement the same visitor interface; each method
// returns true when it changed the value.
struct Visitor
{
    virtual ~Visitor() = default;
    virtual bool num(const std::string &path, double &v, double lo, double hi) = 0;
    virtual bool opt_num(const std::string &path, std::optional<double> &v) = 0;
    virtual bool integer(const std::string &path, int &v, int lo, int hi) = 0;
    virtual bool u64(const std::string &path, std::uint64_t &v) = 0;
    virtual bool text(const std::string &path, std::string &v, const std::vector<std::string> &allowed) = 0;
    virtual bool nums(const std::string &path, std::vector<double> &v, double lo, double hi) = 0;
    virtual bool ints(const std::string &path, std::vector<int> &v, int lo, int hi) = 0;
    virtual bool pair(const std::string &path, double &a, double &b, double lo, double hi, bool ordered) = 0;
    virtual bool pairs(const std::string &path, std::vector<DegRange> &v, double lo, double hi) = 0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kIntMax = std::numeric_limits<int>::max();

void visit_angles(Visitor &v, const std::string &p, channel::AngleDistribution &a, bool *present)
{
    using Kind = channel::AngleDistribution::Kind;
    std::vector<std::string> kinds{"uniform", "fixed"};
    if (present)
        kinds.insert(kinds.begin(), "none");
    std::string kind = present && !*present ? "none" : (a.kind == Kind::fixed ? "fixed" : "uniform");
    if (v.text(p + ".kind", kind, kinds))
    {
        if (present)
            *present = kind != "none";
        a.kind = kind == "fixed" ? Kind::fixed : Kind::uniform;
    }
    double lo = a.lo / deg, hi = a.hi / deg;
    if (v.pair(p + ".range_deg", lo, hi, 0.0, 180.0, true))
    {
        a.lo = lo * deg;
        a.hi = hi * deg;
    }
    std::vector<double> values;
    for (double x : a.values)
        values.push_back(x / deg);
    if (v.nums(p + ".values_deg", values, 0.0, 180.0))
    {
        a.values.clear();
        for (double x : values)
            a.values.push_back(x * deg);
    }
}

void visit_channel(Visitor &v, const std::string &p, channel::ChannelConfig &c)
{
    v.integer(p + ".num_paths", c.num_paths, 1, 1024);
    v.opt_num(p + ".k_factor_db", c.k_factor_db);
    std::string profile = c.power_profile == channel::PowerProfile::custom ? "custom" : "uniform";
    if (v.text(p + ".power_profile", profile, {"uniform", "custom"}))
        c.power_profile = profile == "custom" ? channel::PowerProfile::custom : channel::PowerProfile::uniform;
    v.nums(p + ".custom_powers", c.custom_powers, 0.0, 1.0);
    v.integer(p + ".delay_spread_taps", c.delay_spread_taps, 0, kIntMax);
    visit_angles(v, p + ".arrival", c.arrival, nullptr);
    visit_angles(v, p + ".departure", c.departure, nullptr);
    for (auto [name, slot] : {std::pair{".los_arrival", &c.los_arrival}, std::pair{".los_departure", &c.los_departure}})
    {
        bool present = slot->has_value();
        channel::AngleDistribution a = present ? **slot : channel::AngleDistribution{};
        visit_angles(v, p + name, a, &present);
        if (present)
            *slot = a;
        else
            slot->reset();
    }
}

void visit_fields(Visitor &v, ScenarioConfig &c)
{
    v.u64("seed", c.seed);
    v.text("preset", c.preset, {"ci", "paper"});

    v.pair("geometry.bs", c.bs.x, c.bs.y, -kInf, kInf, false);
    v.pair("geometry.ris", c.ris.x, c.ris.y, -kInf, kInf, false);
    v.pair("geometry.user", c.user.x, c.user.y, -kInf, kInf, false);

    v.integer("arrays.num_bs", c.num_bs, 1, 4096);
    v.integer("arrays.num_ris", c.num_ris, 2, 4096);
    v.integer("arrays.num_ue_antennas", c.num_ue_antennas, 1, 256);
    v.integer("arrays.num_streams", c.num_streams, 1, 4096);

    v.integer("ofdm.num_subcarriers", c.num_subcarriers, 1, 1 << 16);
    v.integer("ofdm.cp_length", c.cp_length, 0, 1 << 16);

    v.num("power.tx_dbm", c.tx_dbm, -200.0, 200.0);
    v.num("power.noise_dbm", c.noise_dbm, -300.0, 200.0);

    v.num("path_loss.bs_ris", c.ple_bs_ris, 0.0, 10.0);
    v.num("path_loss.ris_ue", c.ple_ris_ue, 0.0, 10.0);
    v.num("path_loss.bs_ue", c.ple_bs_ue, 0.0, 10.0);

    visit_channel(v, "channels.bs_ris", c.bs_ris);
    visit_channel(v, "channels.ris_ue", c.ris_ue);
    visit_channel(v, "channels.direct", c.direct);

    v.pair("target.coverage_deg", c.target.coverage_deg.lo, c.target.coverage_deg.hi, 0.0, 180.0, true);
    v.num("target.rolloff", c.target.rolloff, 0.0, 1.0);
    v.opt_num("target.flat_power", c.target.flat_power);
    v.num("target.flat_power_efficiency", c.target.flat_power_efficiency, 0.0, kInf);
    v.num("target.sidelobe_ratio", c.target.sidelobe_ratio, 0.0, 1.0);

    v.num("weights.flat", c.weights.flat, 0.0, kInf);
    v.num("weights.sidelobe", c.weights.sidelobe, 0.0, kInf);
    v.num("weights.rolloff", c.weights.rolloff, 0.0, kInf);

    v.integer("grid.oversampling", c.oversampling, 1, 1024);

    auto &o = c.optimizer;
    v.integer("optimizer.num_starts", o.num_starts, 1, 1024);
    v.integer("optimizer.max_outer_iters", o.max_outer_iters, 1, kIntMax);
    v.num("optimizer.outer_rel_tol", o.outer_rel_tol, 0.0, 1.0);
    v.integer("optimizer.max_inner_iters", o.max_inner_iters, 1, kIntMax);
    v.num("optimizer.grad_tol", o.grad_tol, 0.0, kInf);
    v.num("optimizer.rel_cost_tol", o.rel_cost_tol, 0.0, 1.0);
    v.num("optimizer.armijo.initial_step", o.armijo.initial_step, 0.0, kInf);
    v.num("optimizer.armijo.shrink", o.armijo.shrink, 0.0, 1.0);
    v.num("optimizer.armijo.sufficient_decrease", o.armijo.sufficient_decrease, 0.0, 1.0);
    v.integer("optimizer.armijo.max_halvings", o.armijo.max_halvings, 1, 1074);

    v.integer("broadcast.num_users", c.broadcast.num_users, 0, kIntMax);
    v.integer("broadcast.num_realizations", c.broadcast.num_realizations, 0, kIntMax);

    auto &m = c.ofdma;
    v.integer("ofdma.num_ris", m.num_ris, 2, 4096);
    v.pair("ofdma.coverage_deg", m.coverage_deg.lo, m.coverage_deg.hi, 0.0, 180.0, true);
    v.nums("ofdma.k_factors_db", m.k_factors_db, -kInf, kInf);
    v.nums("ofdma.tx_dbm", m.tx_dbm, -200.0, 200.0);
    v.integer("ofdma.num_realizations", m.num_realizations, 0, kIntMax);
    v.integer("ofdma.num_nlos", m.num_nlos, 0, 1024);
    v.integer("ofdma.num_direct_paths", m.num_direct_paths, 1, 1024);
    std::string mode = m.pattern == PatternMode::synthesized ? "synthesized" : "idealized";
    if (v.text("ofdma.pattern", mode, {"idealized", "synthesized"}))
        m.pattern = mode == "synthesized" ? PatternMode::synthesized : PatternMode::idealized;
    v.integer("ofdma.num_users", m.num_users, 1, 1 << 16);

    v.integer("batch.num_channels", c.batch_channels, 1, kIntMax);

    v.num("beamshift.phi0_deg", c.beamshift.phi0_deg, 0.0, 180.0);
    v.num("beamshift.phi1_deg", c.beamshift.phi1_deg, 0.0, 180.0);
    v.integer("beamshift.num_ris", c.beamshift.num_ris, 2, 4096);
    v.pair("beamshift.coverage_deg", c.beamshift.coverage_deg.lo, c.beamshift.coverage_deg.hi, 0.0, 180.0, true);

    v.ints("scaling.num_ris", c.scaling.num_ris, 2, 4096);
    v.pairs("scaling.coverage_deg", c.scaling.coverage_deg, 0.0, 180.0);
    v.integer("scaling.num_paths", c.scaling.num_paths, 1, 64);

    auto &g = c.gradcheck;
    v.integer("gradcheck.num_instances", g.num_instances, 1, kIntMax);
    v.integer("gradcheck.max_ris", g.max_ris, 2, 256);
    v.integer("gradcheck.max_bs", g.max_bs, 1, 256);
    v.integer("gradcheck.max_paths", g.max_paths, 1, 64);
    v.num("gradcheck.fd_step", g.fd_step, 0.0, 1.0);
    v.num("gradcheck.threshold", g.threshold, 0.0, kInf);

    v.num("overhead_fraction", c.overhead_fraction, 0.0, 1.0);
}

// ---- YAML loader --------------------------------------------------------

struct Entry
{
    YAML::Node node;
    YAML::Mark mark;
    bool used = false;
};

class Loader final : public Visitor
{
  public:
    Loader(std::map<std::string, Entry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)), override_(source_ == "--set")
    {
    }

    bool num(const std::string &path, double &v, double lo, double hi) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        v = scalar_double(*e, e->node, path, lo, hi);
        return true;
    }

    bool opt_num(const std::string &path, std::optional<double> &v) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        if (e->node.IsNull())
            v.reset();
        else if (e->node.IsScalar() && (e->node.Scalar() == "inf" || e->node.Scalar() == "+inf"))
            v = kInf;
        else if (e->node.IsScalar() && e->node.Scalar() == "-inf")
            v = -kInf;
        else
        {
            const double x = scalar_double(*e, e->node, path, -kInf, kInf, true);
            if (std::isnan(x))
                fail(*e, path, "NaN is not allowed");
            v = x;
        }
        return true;
    }

    bool integer(const std::string &path, int &v, int lo, int hi) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        v = scalar_int(*e, e->node, path, lo, hi);
        return true;
    }

    bool u64(const std::string &path, std::uint64_t &v) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        if (!e->node.IsScalar())
            fail(*e, path, "expected an unsigned integer");
        const std::string s = e->node.Scalar();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            fail(*e, path, "expected an unsigned integer, got '" + s + "'");
        try
        {
            v = std::stoull(s);
        }
        catch (const std::exception &)
        {
            fail(*e, path, "integer out of range");
        }
        return true;
    }

    bool text(const std::string &path, std::string &v, const std::vector<std::string> &allowed) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        if (!e->node.IsScalar())
            fail(*e, path, "expected a string");
        const std::string s = e->node.Scalar();
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
        {
            std::string list;
            for (const auto &a : allowed)
                list += (list.empty() ? "" : ", ") + a;
            fail(*e, path, "unknown value '" + s + "' (expected one of: " + list + ")");
        }
        v = s;
        return true;
    }

    bool nums(const std::string &path, std::vector<double> &v, double lo, double hi) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        v.clear();
        for (const auto &item : sequence(*e, path))
            v.push_back(scalar_double(*e, item, path, lo, hi));
        return true;
    }

    bool ints(const std::string &path, std::vector<int> &v, int lo, int hi) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        v.clear();
        for (const auto &item : sequence(*e, path))
            v.push_back(scalar_int(*e, item, path, lo, hi));
        return true;
    }

    bool pair(const std::string &path, double &a, double &b, double lo, double hi, bool ordered) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        std::tie(a, b) = read_pair(*e, e->node, path, lo, hi, ordered);
        return true;
    }

    bool pairs(const std::string &path, std::vector<DegRange> &v, double lo, double hi) override
    {
        Entry *e = take(path);
        if (!e)
            return false;
        v.clear();
        for (const auto &item : sequence(*e, path))
        {
            auto [a, b] = read_pair(*e, item, path, lo, hi, true);
            v.push_back({a, b});
        }
        return true;
    }

    void reject_unused() const
    {
        for (const auto &[path, e] : entries_)
            if (!e.used)
                fail_at(e.mark, path, "unknown key");
    }

  private:
    Entry *take(const std::string &path)
    {
        auto it = entries_.find(path);
        if (it == entries_.end())
            return nullptr;
        it->second.used = true;
        return &it->second;
    }

    [[noreturn]] void fail(const Entry &e, const std::string &path, const std::string &msg) const
    {
        fail_at(e.node.Mark().is_null() ? e.mark : e.node.Mark(), path, msg);
    }

    [[noreturn]] void fail_at(const YAML::Mark &m, const std::string &path, const std::string &msg) const
    {
        char loc[64] = "";
        if (!m.is_null() && !override_)
            std::snprintf(loc, sizeof loc, ":%d:%d", m.line + 1, m.column + 1);
        throw ConfigError(source_ + loc + ": " + path + ": " + msg);
    }

    std::vector<YAML::Node> sequence(const Entry &e, const std::string &path) const
    {
        if (!e.node.IsSequence())
            fail(e, path, "expected a list");
        std::vector<YAML::Node> out;
        for (const auto &item : e.node)
            out.push_back(item);
        return out;
    }

    double scalar_double(const Entry &e, const YAML::Node &n, const std::string &path, double lo, double hi,
                         bool allow_inf = false) const
    {
        const YAML::Mark m = n.Mark().is_null() ? e.mark : n.Mark();
        if (!n.IsScalar())
            fail_at(m, path, "expected a number");
        double x = 0.0;
        try
        {
            x = n.as<double>();
        }
        catch (const YAML::Exception &)
        {
            fail_at(m, path, "expected a number, got '" + n.Scalar() + "'");
        }
        if (std::isnan(x) || (!allow_inf && std::isinf(x)))
            fail_at(m, path, "value must be finite");
        if (!allow_inf && (x < lo || x > hi))
        {
            char buf[160];
            std::snprintf(buf, sizeof buf, "value %g outside [%g, %g]", x, lo, hi);
            fail_at(m, path, buf);
        }
        return x;
    }

    int scalar_int(const Entry &e, const YAML::Node &n, const std::string &path, int lo, int hi) const
    {
        const YAML::Mark m = n.Mark().is_null() ? e.mark : n.Mark();
        if (!n.IsScalar())
            fail_at(m, path, "expected an integer");
        long long x = 0;
        try
        {
            x = n.as<long long>();
        }
        catch (const YAML::Exception &)
        {
            fail_at(m, path, "expected an integer, got '" + n.Scalar() + "'");
        }
        if (x < lo || x > hi)
        {
            char buf[160];
            std::snprintf(buf, sizeof buf, "value %lld outside [%d, %d]", x, lo, hi);
            fail_at(m, path, buf);
        }
        return static_cast<int>(x);
    }

    std::pair<double, double> read_pair(const Entry &e, const YAML::Node &n, const std::string &path, double lo,
                                        double hi, bool ordered) const
    {
        const YAML::Mark m = n.Mark().is_null() ? e.mark : n.Mark();
        if (!n.IsSequence() || n.size() != 2)
            fail_at(m, path, "expected a two-element list");
        const double a = scalar_double(e, n[0], path, lo, hi);
        const double b = scalar_double(e, n[1], path, lo, hi);
        if (ordered && !(a < b))
            fail_at(m, path, "first value must be below the second");
        return {a, b};
    }

    std::map<std::string, Entry> entries_;
    std::string source_;
    bool override_; // marks inside a --set value carry no useful position
};

void flatten(const YAML::Node &n, const std::string &prefix, std::map<std::string, Entry> &out,
             const std::string &source)
{
    for (const auto &kv : n)
    {
        if (!kv.first.IsScalar())
            throw ConfigError(source + ":" + std::to_string(kv.first.Mark().line + 1) + ": keys must be scalars");
        const std::string path = prefix.empty() ? kv.first.Scalar() : prefix + "." + kv.first.Scalar();
        if (out.count(path))
            throw ConfigError(source + ":" + std::to_string(kv.first.Mark().line + 1) + ": " + path +
                              ": duplicate key");
        if (kv.second.IsMap())
            flatten(kv.second, path, out, source);
        else
            out[path] = Entry{kv.second, kv.first.Mark(), false};
    }
}

// Returns the key positions so cross-field validation errors can be located.
std::map<std::string, YAML::Mark> load_into(ScenarioConfig &cfg, const YAML::Node &root, const std::string &source)
{
    std::map<std::string, Entry> entries;
    if (root.IsMap())
        flatten(root, "", entries, source);
    else if (!root.IsNull())
        throw ConfigError(source + ":" + std::to_string(root.Mark().line + 1) +
                          ": top level must be a mapping of sections");
    std::map<std::string, YAML::Mark> marks;
    for (const auto &[path, e] : entries)
        marks[path] = e.mark;
    Loader loader(std::move(entries), source);
    if (root.IsMap() && root["preset"])
    {
        // A preset named in the file applies before the file's own values.
        std::string name = cfg.preset;
        loader.text("preset", name, {"ci", "paper"});
        apply_preset(cfg, name);
    }
    visit_fields(loader, cfg);
    loader.reject_unused();
    return marks;
}

// Location of the key a validation message is about: the longest key path
// named in the message, else the first key of the section it starts with.
std::string locate(const std::map<std::string, YAML::Mark> &marks, const std::string &msg)
{
    const YAML::Mark *best = nullptr;
    std::size_t best_len = 0;
    for (const auto &[path, m] : marks)
        if (path.size() > best_len && msg.find(path) != std::string::npos)
        {
            best = &m;
            best_len = path.size();
        }
    if (!best)
    {
        const std::string section = msg.substr(0, msg.find_first_of(":. "));
        for (const auto &[path, m] : marks)
            if (path.rfind(section + ".", 0) == 0)
            {
                best = &m;
                break;
            }
    }
    return best ? ":" + std::to_string(best->line + 1) + ":" + std::to_string(best->column + 1) : "";
}

// ---- JSON writer --------------------------------------------------------

class JsonWriter final : public Visitor
{
  public:
    nlohmann::json doc = nlohmann::json::object();

    bool num(const std::string &p, double &v, double, double) override { return put(p, v); }
    bool opt_num(const std::string &p, std::optional<double> &v) override
    {
        if (v && std::isinf(*v))
            return put(p, *v > 0 ? "inf" : "-inf");
        return v ? put(p, *v) : put(p, nullptr);
    }
    bool integer(const std::string &p, int &v, int, int) override { return put(p, v); }
    bool u64(const std::string &p, std::uint64_t &v) override { return put(p, v); }
    bool text(const std::string &p, std::string &v, const std::vector<std::string> &) override { return put(p, v); }
    bool nums(const std::string &p, std::vector<double> &v, double, double) override { return put(p, v); }
    bool ints(const std::string &p, std::vector<int> &v, int, int) override { return put(p, v); }
    bool pair(const std::string &p, double &a, double &b, double, double, bool) override
    {
        return put(p, nlohmann::json::array({a, b}));
    }
    bool pairs(const std::string &p, std::vector<DegRange> &v, double, double) override
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &r : v)
            arr.push_back({r.lo, r.hi});
        return put(p, arr);
    }

  private:
    bool put(const std::string &path, nlohmann::json value)
    {
        std::string ptr = "/" + path;
        std::replace(ptr.begin(), ptr.end(), '.', '/');
        doc[nlohmann::json::json_pointer(ptr)] = std::move(value);
        return false;
    }
};

double distance(const Point2 &a, const Point2 &b) { return std::hypot(a.x - b.x, a.y - b.y); }

} // namespace

ScenarioConfig::ScenarioConfig()
{
    // BS-RIS: L = 5 paths, LoS as strong as each NLoS path.
    bs_ris.num_paths = 5;
    bs_ris.k_factor_db = linear_to_db(0.25);
    bs_ris.delay_spread_taps = 8;
    // RIS-UE: LoS at K = 10 dB plus four equal NLoS paths.
    ris_ue.num_paths = 5;
    ris_ue.k_factor_db = 10.0;
    ris_ue.delay_spread_taps = 8;
    // BS-UE: LoS blocked, four equal NLoS paths.
    direct.num_paths = 4;
    direct.delay_spread_taps = 8;
}

void ScenarioConfig::validate() const
{
    auto check = [](bool ok, const std::string &msg) {
        if (!ok)
            throw ConfigError(msg);
    };
    const std::pair<const char *, const channel::ChannelConfig *> links[] = {
        {"channels.bs_ris", &bs_ris}, {"channels.ris_ue", &ris_ue}, {"channels.direct", &direct}};
    for (const auto &[name, link] : links)
    {
        try
        {
            link->validate(cp_length);
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(std::string(name) + ": " + e.what());
        }
    }
    check(num_streams <= num_bs, "arrays.num_streams must not exceed arrays.num_bs");
    check(cp_length < num_subcarriers, "ofdm.cp_length must be below ofdm.num_subcarriers");
    check(distance(bs, ris) >= 1.0 && distance(ris, user) >= 1.0 && distance(bs, user) >= 1.0,
          "geometry: every link distance must be at least 1 m");
    check(target.flat_power_efficiency > 0.0, "target.flat_power_efficiency must be positive");
    check(!target.flat_power || (std::isfinite(*target.flat_power) && *target.flat_power > 0.0),
          "target.flat_power must be positive and finite when given");
    try
    {
        const pattern::TargetPattern t = pattern::TargetPattern::covering(
            target.coverage_deg.lo * deg, target.coverage_deg.hi * deg, 1.0, target.sidelobe_ratio, target.rolloff);
        t.validate();
        pattern::validate_target_on_grid(t, pattern::AngularGrid{oversampling, num_ris});
    }
    catch (const ConfigError &e)
    {
        const std::string msg = e.what();
        throw ConfigError(msg.rfind("target", 0) == 0 ? msg : "target: " + msg);
    }
    weights.validate();
    optimizer.armijo.validate();
    check(!ofdma.k_factors_db.empty() && !ofdma.tx_dbm.empty(), "ofdma: k_factors_db and tx_dbm must be non-empty");
    for (double k : ofdma.k_factors_db)
        check(!std::isnan(k), "ofdma.k_factors_db: NaN");
    check(ofdma.num_nlos > 0 || std::all_of(ofdma.k_factors_db.begin(), ofdma.k_factors_db.end(),
                                             [](double k) { return std::isinf(k) && k > 0; }),
          "ofdma: finite K needs ofdma.num_nlos >= 1");
    check(ofdma.num_users <= num_subcarriers, "ofdma.num_users must not exceed ofdm.num_subcarriers");
    check(!scaling.num_ris.empty() && !scaling.coverage_deg.empty(), "scaling: lists must be non-empty");
    check(gradcheck.max_paths >= 1 && gradcheck.max_ris >= 2, "gradcheck: instance bounds too small");
}

analysis::LinkBudget ScenarioConfig::link_budget() const { return link_budget(tx_dbm); }

analysis::LinkBudget ScenarioConfig::link_budget(double tx_dbm_override) const
{
    analysis::LinkBudget b;
    b.tx_power_w = dbm_to_watt(tx_dbm_override);
    b.noise_power_w = dbm_to_watt(noise_dbm);
    b.beta1 = channel::path_loss_linear(distance(bs, ris), ple_bs_ris);
    b.beta2 = channel::path_loss_linear(distance(ris, user), ple_ris_ue);
    b.beta = channel::path_loss_linear(distance(bs, user), ple_bs_ue);
    return b;
}

synthesis::SynthesisOptions ScenarioConfig::synthesis_options() const
{
    synthesis::SynthesisOptions o;
    o.num_streams = num_streams;
    o.num_starts = optimizer.num_starts;
    o.seed = derive_seed(seed, 0x53594E54ull); // "SYNT"
    o.max_outer_iters = optimizer.max_outer_iters;
    o.outer_rel_tol = optimizer.outer_rel_tol;
    o.phase.armijo = optimizer.armijo;
    o.phase.grad_tol = optimizer.grad_tol;
    o.phase.rel_cost_tol = optimizer.rel_cost_tol;
    o.phase.max_iters = optimizer.max_inner_iters;
    o.precoder.armijo = optimizer.armijo;
    o.precoder.grad_tol = optimizer.grad_tol;
    o.precoder.rel_cost_tol = optimizer.rel_cost_tol;
    o.precoder.max_iters = optimizer.max_inner_iters;
    return o;
}

void apply_preset(ScenarioConfig &cfg, const std::string &name)
{
    if (name == "ci")
    {
        cfg.broadcast = {128, 100};
        cfg.ofdma.num_realizations = 1000;
    }
    else if (name == "paper")
    {
        cfg.broadcast = {1280, 500};
        cfg.ofdma.num_realizations = 1000;
    }
    else
        throw ConfigError("unknown preset '" + name + "' (expected ci or paper)");
    cfg.preset = name;
}

ScenarioConfig load_config_string(const std::string &yaml, const std::string &source, const ScenarioConfig &base)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(yaml);
    }
    catch (const YAML::ParserException &e)
    {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    ScenarioConfig cfg = base;
    const auto marks = load_into(cfg, root, source);
    try
    {
        cfg.validate();
    }
    catch (const ConfigError &e)
    {
        throw ConfigError(source + locate(marks, e.what()) + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_config_file(const std::string &path, const ScenarioConfig &base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open configuration file");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_string(ss.str(), path, base);
}

void apply_overrides(ScenarioConfig &cfg, const std::vector<std::string> &assignments)
{
    for (const auto &a : assignments)
    {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set " + a + ": expected key=value");
        const std::string key = a.substr(0, eq);
        YAML::Node value;
        try
        {
            value = YAML::Load(a.substr(eq + 1));
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError("--set " + key + ": " + e.msg);
        }
        std::map<std::string, Entry> entries;
        entries[key] = Entry{value, YAML::Mark::null_mark(), false};
        Loader loader(std::move(entries), "--set");
        visit_fields(loader, cfg);
        loader.reject_unused();
        if (key == "preset")
            apply_preset(cfg, cfg.preset);
    }
    cfg.validate();
}

std::string canonical_json(const ScenarioConfig &cfg)
{
    ScenarioConfig copy = cfg;
    JsonWriter w;
    visit_fields(w, copy);
    return w.doc.dump();
}

std::string config_hash(const ScenarioConfig &cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical_json(cfg))
    {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace risbc::harness
