// SPDX-License-Identifier: Apache-2.0
//
// fdsplit: UL/DL antenna splitting for full-duplex multi-antenna base stations
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

#include "fdsplit/harness.hpp"

#include "fdsplit/baselines.hpp"
#include "fdsplit/channel.hpp"
#include "fdsplit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace fdsplit {

namespace {

constexpr std::uint64_t kRealizationStream = 1;
constexpr std::uint64_t kRestartStream = 2;

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw ConfigError("empty entry in list '" + s + "'");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

const char* to_string(Experiment e)
{
    switch (e) {
    case Experiment::Single: return "single";
    case Experiment::Cdf: return "cdf";
    case Experiment::SweepSi: return "sweep_si";
    case Experiment::SweepAntennas: return "sweep_antennas";
    }
    return "?";
}

const char* to_string(Method m)
{
    switch (m) {
    case Method::Rlx: return "rlx";
    case Method::Exh: return "exh";
    case Method::Split: return "split";
    }
    return "?";
}

Experiment parse_experiment(const std::string& s)
{
    if (s == "single") return Experiment::Single;
    if (s == "cdf") return Experiment::Cdf;
    if (s == "sweep_si" || s == "sweep-si") return Experiment::SweepSi;
    if (s == "sweep_antennas" || s == "sweep-antennas") return Experiment::SweepAntennas;
    throw ConfigError("unknown experiment '" + s + "'");
}

Method parse_method(const std::string& s)
{
    if (s == "rlx") return Method::Rlx;
    if (s == "exh") return Method::Exh;
    if (s == "split") return Method::Split;
    throw ConfigError("unknown method '" + s + "' (expected rlx, exh or split)");
}

std::vector<Method> parse_method_list(const std::string& csv)
{
    std::vector<Method> out;
    for (const auto& item : split_list(csv))
        out.push_back(parse_method(item));
    if (out.empty())
        throw ConfigError("method list is empty");
    return out;
}

Profile parse_profile(const std::string& s)
{
    if (s == "paper") return Profile::Full;
    if (s == "desk") return Profile::Desk;
    throw ConfigError("unknown profile '" + s + "' (expected paper or desk)");
}

std::vector<Method> ExperimentSpec::ordered_methods() const
{
    auto m = methods;
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

std::vector<std::pair<int, double>> ExperimentSpec::sweep_points(const SystemConfig& cfg) const
{
    const double si_db = 10.0 * std::log10(cfg.si_cancellation);
    std::vector<std::pair<int, double>> pts;
    switch (experiment) {
    case Experiment::Single:
    case Experiment::Cdf:
        pts.emplace_back(cfg.num_antennas, si_db);
        break;
    case Experiment::SweepSi:
        for (double s : si_levels_db)
            pts.emplace_back(cfg.num_antennas, s);
        break;
    case Experiment::SweepAntennas:
        for (int m : antenna_counts)
            pts.emplace_back(m, si_db);
        break;
    }
    return pts;
}

void ExperimentSpec::validate(const SystemConfig& cfg) const
{
    cfg.validate();
    if (monte_carlo_iters < 0)
        throw ConfigError("monte_carlo_iters must be >= 0");
    if (methods.empty())
        throw ConfigError("at least one method is required");
    if (experiment == Experiment::SweepSi && si_levels_db.empty())
        throw ConfigError("si_levels_db is empty");
    if (experiment == Experiment::SweepAntennas && antenna_counts.empty())
        throw ConfigError("antenna_counts is empty");
    for (double s : si_levels_db)
        if (!std::isfinite(s))
            throw ConfigError("si_levels_db entries must be finite");
    for (int m : antenna_counts)
        if (m < 2)
            throw ConfigError("antenna_counts entries must be >= 2");

    const auto pts = sweep_points(cfg);
    const bool exh = std::find(methods.begin(), methods.end(), Method::Exh) != methods.end();
    for (const auto& [m, s] : pts)
        if (exh && m > kMaxExhaustiveAntennas)
            throw CapacityError("EXH requested at M = " + std::to_string(m) + "; exhaustive search supports at most " +
                                std::to_string(kMaxExhaustiveAntennas) + " antennas");
}

ExperimentSpec profile_spec(Profile p, Experiment e)
{
    ExperimentSpec s;
    s.experiment = e;
    if (p == Profile::Desk) {
        s.monte_carlo_iters = 100;
        s.si_levels_db = {-50, -75, -100};
        s.antenna_counts = {8};
    }
    if (e == Experiment::SweepAntennas)
        s.methods = {Method::Rlx, Method::Split};
    if (e == Experiment::Single)
        s.monte_carlo_iters = 1;
    return s;
}

ExperimentSpec apply_experiment_keys(KeyValues& kv, ExperimentSpec spec)
{
    auto take = [&kv](const char* key, auto&& fn) {
        if (auto it = kv.find(key); it != kv.end()) {
            fn(it->first, it->second);
            kv.erase(it);
        }
    };
    take("experiment", [&](auto&, auto& v) { spec.experiment = parse_experiment(v); });
    take("methods", [&](auto&, auto& v) { spec.methods = parse_method_list(v); });
    take("monte_carlo_iters", [&](auto& k, auto& v) { spec.monte_carlo_iters = static_cast<int>(parse_int(k, v)); });
    take("si_levels_db", [&](auto& k, auto& v) {
        spec.si_levels_db.clear();
        for (const auto& item : split_list(v))
            spec.si_levels_db.push_back(parse_double(k, item));
    });
    take("antenna_counts", [&](auto& k, auto& v) {
        spec.antenna_counts.clear();
        for (const auto& item : split_list(v))
            spec.antenna_counts.push_back(static_cast<int>(parse_int(k, item)));
    });
    take("output_path", [&](auto&, auto& v) { spec.output_path = v; });
    take("record_wall_time", [&](auto& k, auto& v) { spec.record_wall_time = parse_bool(k, v); });
    return spec;
}

std::string csv_row(const RunRecord& r)
{
    std::string row;
    row += to_string(r.experiment);
    row += ',' + std::to_string(r.num_antennas);
    row += ',' + fmt(r.si_db);
    row += ',' + std::to_string(r.realization);
    row += ',';
    row += to_string(r.method);
    if (r.failed) {
        row += ",nan,nan," + std::to_string(r.iterations) + ",failed";
    } else {
        row += ',' + fmt(r.sum_mse);
        row += ',' + fmt(r.sum_se);
        row += ',' + std::to_string(r.iterations);
        row += r.converged ? ",1" : ",0";
    }
    row += ',' + fmt(r.wall_ms);
    row += ',' + std::to_string(r.seed);
    return row;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path)
{
    auto f = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
    if (!*f)
        throw IoError("cannot open '" + path + "' for writing");
    out_ = f.get();
    owned_ = std::move(f);
    *out_ << kCsvHeader << '\n';
    check();
}

CsvWriter::CsvWriter(std::ostream& out) : out_(&out), path_("<stream>")
{
    *out_ << kCsvHeader << '\n';
    check();
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::write(const RunRecord& r)
{
    *out_ << csv_row(r) << '\n';
    check();
}

void CsvWriter::check()
{
    out_->flush();
    if (!*out_)
        throw IoError("write to '" + path_ + "' failed");
}

namespace {

RunRecord run_method(Method method, const ChannelRealization& ch, const SystemConfig& cfg, const RandomStream& rlx_rng)
{
    RunRecord r;
    r.method = method;
    switch (method) {
    case Method::Rlx: {
        const auto res = rlx_prox(ch, cfg, rlx_rng);
        r.sum_mse = res.sum_mse;
        r.sum_se = res.sum_se;
        r.iterations = res.iterations_used;
        r.converged = res.converged;
        break;
    }
    case Method::Exh: {
        const auto res = exhaustive(ch, ExhaustiveOptions{cfg.exclude_degenerate});
        r.sum_mse = res.sum_mse;
        r.sum_se = res.sum_se;
        break;
    }
    case Method::Split: {
        const auto res = split_baseline(ch);
        r.sum_mse = res.sum_mse;
        r.sum_se = res.sum_se;
        break;
    }
    }
    return r;
}

} // namespace

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg, const RecordSink& sink)
{
    spec.validate(cfg);
    const RandomStream master(spec.seed);
    const auto methods = spec.ordered_methods();

    std::vector<RunRecord> out;
    for (const auto& [m, si_db] : spec.sweep_points(cfg)) {
        SystemConfig point = cfg;
        point.num_antennas = m;
        point.si_cancellation = db_to_linear(si_db);
        point.validate();

        for (int n = 0; n < spec.monte_carlo_iters; ++n) {
            const auto key = [&](std::uint64_t stream) {
                return master.substream({stream, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n)});
            };
            const auto ch = draw_realization(point, key(kRealizationStream));
            const auto fp = ch.fingerprint();

            for (Method method : methods) {
                const auto t0 = std::chrono::steady_clock::now();
                RunRecord r;
                try {
                    r = run_method(method, ch, point, key(kRestartStream));
                } catch (const CapacityError&) {
                    throw;
                } catch (const std::exception& e) {
                    r = RunRecord{};
                    r.method = method;
                    r.failed = true;
                    r.converged = false;
                    r.sum_mse = r.sum_se = std::nan("");
                    r.error = e.what();
                }
                if (!r.failed && !std::isfinite(r.sum_se)) {
                    r.failed = true;
                    r.error = "sum SE is not finite";
                }
                if (spec.record_wall_time)
                    r.wall_ms =
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                r.experiment = spec.experiment;
                r.num_antennas = m;
                r.si_db = si_db;
                r.realization = n;
                r.seed = spec.seed;
                r.fingerprint = fp;
                if (sink)
                    sink(r);
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

std::vector<std::pair<double, double>> aggregate_cdf(const std::vector<RunRecord>& records, Method method)
{
    std::vector<double> v;
    for (const auto& r : records)
        if (r.method == method && !r.failed)
            v.push_back(r.sum_se);
    if (v.empty())
        throw std::invalid_argument(std::string("no records for method ") + to_string(method));
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(v.size());
    const double n = static_cast<double>(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        cdf.emplace_back(v[k], static_cast<double>(k + 1) / n);
    return cdf;
}

std::vector<GroupMean> aggregate_mean(const std::vector<RunRecord>& records, const std::vector<GroupKey>& keys)
{
    auto has = [&keys](GroupKey k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };
    using Key = std::tuple<int, int, double>;
    std::map<Key, GroupMean> groups;
    for (const auto& r : records) {
        if (r.failed)
            continue;
        GroupMean proto;
        if (has(GroupKey::Method))
            proto.method = r.method;
        if (has(GroupKey::NumAntennas))
            proto.num_antennas = r.num_antennas;
        if (has(GroupKey::SiDb))
            proto.si_db = r.si_db;
        const Key k{static_cast<int>(proto.method), proto.num_antennas, proto.si_db};
        auto [it, fresh] = groups.try_emplace(k, proto);
        auto& g = it->second;
        g.mean_se += r.sum_se;
        g.mean_mse += r.sum_mse;
        ++g.count;
    }
    std::vector<GroupMean> out;
    for (auto& [k, g] : groups) {
        g.mean_se /= g.count;
        g.mean_mse /= g.count;
        out.push_back(g);
    }
    return out;
}

} // namespace fdsplit
