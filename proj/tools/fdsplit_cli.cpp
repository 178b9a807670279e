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

// fdsplit single|cdf|sweep-si|sweep-antennas|selftest [options]
//
// Settings are layered: profile defaults, then --config, then flags.
// Exit codes: 0 ok, 1 selftest failure or unexpected error, 2 config error,
// 3 capacity error, 4 I/O error.

#include "fdsplit/baselines.hpp"
#include "fdsplit/channel.hpp"
#include "fdsplit/decomposition.hpp"
#include "fdsplit/harness.hpp"
#include "fdsplit/solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace fdsplit;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> iters;
    std::string methods;
    std::string out;
    std::string profile = "paper";
    bool timing = false;
};

void print_summary(const std::vector<RunRecord>& records, Experiment e)
{
    std::vector<GroupKey> keys{GroupKey::Method};
    if (e == Experiment::SweepSi)
        keys.push_back(GroupKey::SiDb);
    if (e == Experiment::SweepAntennas)
        keys.push_back(GroupKey::NumAntennas);
    std::printf("%-6s %4s %8s %6s %12s %12s\n", "method", "M", "si_db", "n", "mean_se", "mean_mse");
    for (const auto& g : aggregate_mean(records, keys)) {
        std::printf("%-6s %4d %8.1f %6d %12.4f %12.5f\n", to_string(g.method), g.num_antennas, g.si_db, g.count,
                    g.mean_se, g.mean_mse);
    }
    int failed = 0;
    for (const auto& r : records)
        failed += r.failed ? 1 : 0;
    if (failed > 0)
        std::printf("failed runs: %d\n", failed);
}

int run(Experiment e, const Options& o)
{
    ExperimentSpec spec = profile_spec(parse_profile(o.profile), e);
    SystemConfig cfg;
    if (!o.config_path.empty()) {
        auto kv = read_key_value_file(o.config_path);
        cfg = apply_system_keys(kv, cfg);
        spec = apply_experiment_keys(kv, spec);
        if (!kv.empty())
            throw ConfigError("unknown config key '" + kv.begin()->first + "'");
    }
    spec.experiment = e;
    if (o.seed) {
        spec.seed = *o.seed;
        cfg.seed = *o.seed;
    } else {
        spec.seed = cfg.seed;
    }
    if (o.iters)
        spec.monte_carlo_iters = *o.iters;
    if (!o.methods.empty())
        spec.methods = parse_method_list(o.methods);
    if (!o.out.empty())
        spec.output_path = o.out;
    spec.record_wall_time = spec.record_wall_time || o.timing;
    spec.validate(cfg);

    std::vector<RunRecord> records;
    if (spec.output_path.empty() || spec.output_path == "-") {
        CsvWriter w(std::cout);
        records = run_experiment(spec, cfg, [&w](const RunRecord& r) { w.write(r); });
    } else {
        CsvWriter w(spec.output_path);
        records = run_experiment(spec, cfg, [&w](const RunRecord& r) { w.write(r); });
        print_summary(records, e);
    }
    return 0;
}

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

bool report(const char* name, bool ok, const std::string& detail)
{
    std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    return ok;
}

// Quick internal consistency checks on a handful of random instances.
int selftest(const Options& o)
{
    SystemConfig cfg;
    cfg.seed = o.seed.value_or(1);
    const RandomStream master(cfg.seed);
    bool ok = true;

    const auto ids = identity_suite(master.substream(1), 20, 1e-10);
    bool ids_ok = true;
    for (const auto& c : ids)
        ids_ok = ids_ok && c.passed;
    ok &= report("trace/diag identities", ids_ok, "");

    double worst_offset = 0;
    double worst_grad = 0;
    for (std::uint64_t n = 0; n < 5; ++n) {
        const auto ch = draw_realization(cfg, master.substream({2, n}));
        auto s = master.substream({3, n});
        RVectord x(cfg.num_antennas), y(cfg.num_antennas), d(cfg.num_antennas);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x(k) = s.uniform();
            y(k) = s.uniform();
            d(k) = s.normal();
        }
        const AntennaAssignment xa(x), ya(y);
        const auto f = mmse_filters(ch, xa);
        const auto t = build_quadratic_terms(ch, f);
        const double direct = evaluate_mse(ch, xa, f).sum_mse - evaluate_mse(ch, ya, f).sum_mse;
        const double split = decomposed_objective(xa, t, ch) - decomposed_objective(ya, t, ch);
        worst_offset = std::max(worst_offset, std::abs(direct - split) / std::max(1.0, std::abs(direct)));

        const double h = 1e-6;
        RVectord xp = (x + h * d).cwiseMax(0.0).cwiseMin(1.0);
        RVectord xm = (x - h * d).cwiseMax(0.0).cwiseMin(1.0);
        const double fd = (f_ud_value(AntennaAssignment(xp), t, ch) - f_ud_value(AntennaAssignment(xm), t, ch)) /
                          (xp - xm).dot(d) * d.squaredNorm();
        const double an = grad_f_ud_diag(xa, t, ch).dot(d);
        worst_grad = std::max(worst_grad, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
    }
    ok &= report("decomposition offset", worst_offset < 1e-8, "max rel err " + sci(worst_offset));
    ok &= report("coupling gradient", worst_grad < 1e-4, "max rel err " + sci(worst_grad));

    bool dominance = true;
    for (std::uint64_t n = 0; n < 3; ++n) {
        const auto ch = draw_realization(cfg, master.substream({4, n}));
        const auto ex = exhaustive(ch);
        const auto rl = rlx_prox(ch, cfg, master.substream({5, n}));
        dominance = dominance && ex.sum_mse <= rl.sum_mse + 1e-12;
    }
    ok &= report("EXH <= RLX-PROX sum MSE", dominance, "");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UL/DL antenna splitting for full-duplex base stations"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--iters", o.iters, "Monte Carlo realizations")->check(CLI::NonNegativeNumber);
        sub->add_option("--methods", o.methods, "comma list of rlx, exh, split");
        sub->add_option("--out", o.out, "CSV output path (stdout if omitted)");
        sub->add_option("--profile", o.profile, "paper (full scale) or desk (reduced)")->check(CLI::IsMember({"paper", "desk"}));
        sub->add_flag("--timing", o.timing, "fill wall_ms (makes output run-dependent)");
    };

    const std::pair<const char*, Experiment> experiments[] = {
        {"single", Experiment::Single},
        {"cdf", Experiment::Cdf},
        {"sweep-si", Experiment::SweepSi},
        {"sweep-antennas", Experiment::SweepAntennas},
    };
    std::vector<std::pair<CLI::App*, Experiment>> subs;
    for (const auto& [name, e] : experiments) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        add_common(sub);
        subs.emplace_back(sub, e);
    }
    auto* st = app.add_subcommand("selftest", "internal consistency checks");
    st->add_option("--seed", o.seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (st->parsed())
            return selftest(o);
        for (const auto& [sub, e] : subs)
            if (sub->parsed())
                return run(e, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
