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


// One PASS/FAIL line per acceptance criterion.
//
//   fdsplit_acceptance [--expect-fail N]... [N]...
//
// Bare numbers select which criteria run (all by default). Exit status is 1
// if a criterion fails that was not named with --expect-fail; expected
// failures still print FAIL.

#include "fdsplit/baselines.hpp"
#include "fdsplit/channel.hpp"
#include "fdsplit/decomposition.hpp"
#include "fdsplit/harness.hpp"
#include "fdsplit/solver.hpp"

#include "../oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef FDSPLIT_CLI_PATH
#define FDSPLIT_CLI_PATH "fdsplit"
#endif

using namespace fdsplit;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

RVectord uniform_point(RandomStream& s, Eigen::Index m, double lo = 0.0, double hi = 1.0)
{
    RVectord x(m);
    for (Eigen::Index k = 0; k < m; ++k)
        x(k) = lo + (hi - lo) * s.uniform();
    return x;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// runtime_limit <= 0 means no limit
Outcome with_time_limit(Outcome o, double elapsed, double runtime_limit)
{
    o.detail += fmt("; %.1f s", elapsed);
    if (runtime_limit > 0) {
        o.detail += fmt(" (limit %.0f s)", runtime_limit);
        o.pass = o.pass && elapsed < runtime_limit;
    }
    return o;
}

Outcome decomposition_difference_form()
{
    SystemConfig cfg;
    const RandomStream master = RandomStream(kSeed).substream(1);
    double worst = 0;
    for (std::uint64_t n = 0; n < 50; ++n) {
        const auto ch = draw_realization(cfg, master.substream({1, n}));
        auto s = master.substream({2, n});
        const AntennaAssignment x(uniform_point(s, cfg.num_antennas));
        const AntennaAssignment y(uniform_point(s, cfg.num_antennas));
        const auto f = mmse_filters(ch, x);
        const auto t = build_quadratic_terms(ch, f);
        const double e1 = evaluate_mse(ch, x, f).sum_mse;
        const double e2 = evaluate_mse(ch, y, f).sum_mse;
        const double split = decomposed_objective(x, t, ch) - decomposed_objective(y, t, ch);
        worst = std::max(worst, std::abs((e1 - e2) - split) / std::max(std::abs(e1), std::abs(e2)));
    }
    return {worst < 1e-8, "50 instances, max rel err " + fmt("%.2e", worst) + " (tol 1e-8)"};
}

Outcome coupling_gradient()
{
    SystemConfig cfg;
    const RandomStream master = RandomStream(kSeed).substream(2);
    const auto M = cfg.num_antennas;
    double worst_fast = 0, worst_full = 0;
    for (std::uint64_t n = 0; n < 20; ++n) {
        const auto ch = draw_realization(cfg, master.substream({1, n}));
        auto s = master.substream({2, n});
        const RVectord x = uniform_point(s, M, 0.05, 0.95);
        const AntennaAssignment xa(x);
        const auto t = build_quadratic_terms(ch, mmse_filters(ch, xa));
        const double h = 1e-6;
        RVectord fd(M);
        for (int k = 0; k < M; ++k) {
            RVectord xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            fd(k) = (f_ud_value(AntennaAssignment(xp), t, ch) - f_ud_value(AntennaAssignment(xm), t, ch)) / (2 * h);
        }
        const RVectord fast = grad_f_ud_diag(xa, t, ch);
        const RVectord full = grad_f_ud(xa, t, ch).diagonal().real();
        worst_fast = std::max(worst_fast, (fast - fd).norm() / fd.norm());
        worst_full = std::max(worst_full, (full - fd).norm() / fd.norm());
    }
    return {worst_fast < 1e-6 && worst_full < 1e-6, "20 points, max rel err " + fmt("%.2e", worst_fast) +
                                                        " (low-rank), " + fmt("%.2e", worst_full) +
                                                        " (full matrix) (tol 1e-6)"};
}

Outcome identities_suite()
{
    const auto res = identity_suite(RandomStream(kSeed).substream(3), 100, 1e-10);
    bool ok = true;
    double worst = 0;
    for (const auto& r : res) {
        ok = ok && r.passed && r.instances == 100;
        worst = std::max(worst, r.max_rel_error);
    }
    return {ok, "4 identities x 100 instances, max rel err " + fmt("%.2e", worst) + " (tol 1e-10)"};
}

Outcome mmse_optimality()
{
    SystemConfig cfg;
    const RandomStream master = RandomStream(kSeed).substream(4);
    int improved = 0;
    double worst_gain = 0;
    for (std::uint64_t n = 0; n < 10; ++n) {
        const auto ch = draw_realization(cfg, master.substream({1, n}));
        auto s = master.substream({2, n});
        const AntennaAssignment x(uniform_point(s, cfg.num_antennas));
        const auto f = mmse_filters(ch, x);
        const auto base = evaluate_mse(ch, x, f);
        for (int p = 0; p < 100; ++p) {
            // perturbation size spread over four decades relative to the filters
            const double scale = std::pow(10.0, -4.0 + 4.0 * s.uniform());
            ReceiveFilters g = f;
            for (Eigen::Index i = 0; i < g.r_ul.cols(); ++i) {
                const double cn = f.r_ul.col(i).norm();
                for (Eigen::Index k = 0; k < g.r_ul.rows(); ++k)
                    if (x.ul()(k) > 0)
                        g.r_ul(k, i) += scale * cn * s.complex_normal();
            }
            for (Eigen::Index j = 0; j < g.r_dl.size(); ++j)
                g.r_dl(j) += scale * std::abs(f.r_dl(j)) * s.complex_normal();
            const auto pert = evaluate_mse(ch, x, g);
            const double gain = std::max((base.mse_ul - pert.mse_ul).maxCoeff(), (base.mse_dl - pert.mse_dl).maxCoeff());
            worst_gain = std::max(worst_gain, gain);
            improved += gain > 1e-12 ? 1 : 0;
        }
    }

    // one antenna, one UL user: Wiener filter
    double worst_scalar = 0;
    auto s = master.substream(3);
    for (int n = 0; n < 20; ++n) {
        ChannelRealization ch;
        const double g = std::pow(10.0, -12.0 + 12.0 * s.uniform());
        ch.h_ul = CMatrixd::Constant(1, 1, std::sqrt(g) * s.complex_normal());
        ch.h_dl = CMatrixd::Zero(1, 1);
        ch.h_si = CMatrixd::Zero(1, 1);
        ch.g_ue = CMatrixd::Zero(1, 1);
        ch.w_dl = CMatrixd::Zero(1, 1);
        ch.q_ul = RVectord::Constant(1, 0.2 * (0.5 + s.uniform()));
        ch.noise_var_bs = 7.2e-13 * (0.5 + s.uniform());
        ch.noise_var_ue = 2.9e-13;
        const double q = ch.q_ul(0), h2 = std::norm(ch.h_ul(0, 0)), n0 = ch.noise_var_bs;
        const double expect = n0 / (q * h2 + n0);
        const double got = evaluate_assignment(ch, AntennaAssignment(RVectord::Ones(1))).mse_ul(0);
        worst_scalar = std::max(worst_scalar, std::abs(got - expect) / expect);
    }
    return {improved == 0 && worst_scalar <= 1e-12,
            std::to_string(improved) + " of 1000 perturbations improved a user (largest gain " +
                fmt("%.1e", worst_gain) + "); scalar case max rel err " + fmt("%.1e", worst_scalar) + " (tol 1e-12)"};
}

Outcome mse_expectation()
{
    const RandomStream master = RandomStream(kSeed).substream(5);
    const long samples = 1000000;
    double worst_z = 0, worst_user_z = 0;
    for (std::uint64_t n = 0; n < 5; ++n) {
        auto s = master.substream({1, n});
        // unit-scale instance with visible distortion and SI so every term of
        // the covariance contributes to the error
        const auto ch = oracle::random_instance(s, 8, 4, 4, 0.05, 0.05, 0.3);
        const RVectord x = oracle::random_interior(s, 8);
        const AntennaAssignment xa(x);
        const auto f = mmse_filters(ch, xa);
        const auto rep = evaluate_mse(ch, xa, f);
        auto sim = master.substream({2, n});
        const auto est = oracle::simulate_all(ch, x, f.r_ul, f.r_dl, sim, samples);
        for (int i = 0; i < 4; ++i)
            worst_user_z = std::max(worst_user_z, std::abs(est.ul[i].mean - rep.mse_ul(i)) / est.ul[i].stderr_);
        for (int j = 0; j < 4; ++j)
            worst_user_z = std::max(worst_user_z, std::abs(est.dl[j].mean - rep.mse_dl(j)) / est.dl[j].stderr_);
        worst_z = std::max(worst_z, std::abs(est.sum.mean - rep.sum_mse) / est.sum.stderr_);
    }
    return {worst_z <= 3.0, "5 instances x 1e6 samples, max |z| of sum MSE " + fmt("%.2f", worst_z) +
                                " (tol 3), max per-user |z| " + fmt("%.2f", worst_user_z)};
}

std::vector<RunRecord> run(Experiment e, std::vector<Method> methods, int iters, const SystemConfig& cfg,
                           std::uint64_t seed, std::vector<double> si = {}, std::vector<int> ms = {})
{
    ExperimentSpec spec;
    spec.experiment = e;
    spec.methods = std::move(methods);
    spec.monte_carlo_iters = iters;
    spec.seed = seed;
    if (!si.empty())
        spec.si_levels_db = std::move(si);
    if (!ms.empty())
        spec.antenna_counts = std::move(ms);
    return run_experiment(spec, cfg);
}

int failures(const std::vector<RunRecord>& rs)
{
    return static_cast<int>(std::count_if(rs.begin(), rs.end(), [](const RunRecord& r) { return r.failed; }));
}

Outcome optimality_gap()
{
    SystemConfig cfg;
    cfg.si_cancellation = 1e-10;
    const auto rs = run(Experiment::Cdf, {Method::Rlx, Method::Exh, Method::Split}, 100, cfg, kSeed + 6);
    std::vector<double> exh_over_rlx, rlx_over_split;
    for (std::size_t k = 0; k + 2 < rs.size(); k += 3) {
        exh_over_rlx.push_back(rs[k + 1].sum_se / rs[k].sum_se);
        rlx_over_split.push_back(rs[k].sum_se / rs[k + 2].sum_se);
    }
    const double a = median(exh_over_rlx), b = median(rlx_over_split);
    return {failures(rs) == 0 && a <= 1.20 && b >= 1.10,
            "median EXH/RLX " + fmt("%.3f", a) + " (<= 1.20), median RLX/SPLIT " + fmt("%.3f", b) + " (>= 1.10)"};
}

double mean_se(const std::vector<GroupMean>& g, Method m, int M, double si)
{
    for (const auto& x : g)
        if (x.method == m && x.num_antennas == M && x.si_db == si)
            return x.mean_se;
    return std::nan("");
}

Outcome si_sweep()
{
    SystemConfig cfg;
    const std::vector<double> levels{-50, -75, -100};
    const auto rs = run(Experiment::SweepSi, {Method::Rlx, Method::Split}, 100, cfg, kSeed + 7, levels);
    const auto g = aggregate_mean(rs, {GroupKey::Method, GroupKey::SiDb});
    const double r50 = mean_se(g, Method::Rlx, 0, -50), r75 = mean_se(g, Method::Rlx, 0, -75),
                 r100 = mean_se(g, Method::Rlx, 0, -100);
    const double s50 = mean_se(g, Method::Split, 0, -50), s75 = mean_se(g, Method::Split, 0, -75),
                 s100 = mean_se(g, Method::Split, 0, -100);
    // RLX may not lose more than 10% from its best level at any weaker
    // cancellation level; a rise is allowed
    double worst_drop = 0;
    const double rlx[3] = {r100, r75, r50};
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            worst_drop = std::max(worst_drop, (rlx[a] - rlx[b]) / rlx[a]);
    const bool rlx_ok = worst_drop <= 0.10;
    const bool split_ok = s50 < s75 && s75 < s100;
    const bool gap_ok = (r50 - s50) > (r100 - s100);
    std::ostringstream d;
    d << "RLX " << fmt("%.2f", r100) << "/" << fmt("%.2f", r75) << "/" << fmt("%.2f", r50) << " (largest drop "
      << fmt("%.1f", 100 * worst_drop) << "% <= 10%, change -100 -> -50 " << fmt("%+.1f", 100 * (r50 - r100) / r100)
      << "%), SPLIT " << fmt("%.2f", s100) << "/" << fmt("%.2f", s75) << "/"
      << fmt("%.2f", s50) << " at -100/-75/-50 dB; gap " << fmt("%.2f", r100 - s100) << " -> " << fmt("%.2f", r50 - s50);
    return {failures(rs) == 0 && rlx_ok && split_ok && gap_ok, d.str()};
}

Outcome antenna_sweep()
{
    SystemConfig cfg;
    cfg.si_cancellation = 1e-10;
    const std::vector<int> ms{8, 32, 64};
    const auto rs = run(Experiment::SweepAntennas, {Method::Rlx, Method::Split}, 50, cfg, kSeed + 8, {}, ms);
    const auto g = aggregate_mean(rs, {GroupKey::Method, GroupKey::NumAntennas});
    std::vector<double> gap;
    std::ostringstream d;
    d << "relative gap";
    for (int m : ms) {
        const double r = mean_se(g, Method::Rlx, m, 0), s = mean_se(g, Method::Split, m, 0);
        gap.push_back((r - s) / s);
        d << " M=" << m << ": " << fmt("%.1f", 100 * gap.back()) << "%";
    }
    const bool ok = failures(rs) == 0 && gap[0] > gap[1] && gap[1] > gap[2] && gap[2] < 0.5 * gap[0];
    return {ok, d.str()};
}

Outcome complexity_scaling()
{
    SystemConfig cfg;
    cfg.num_restarts = 1;
    const RandomStream master = RandomStream(kSeed).substream(9);
    const std::vector<int> ms{8, 16, 32, 64};
    std::vector<double> lx, ly;
    std::ostringstream d;
    d << "median single-restart time";
    for (int m : ms) {
        cfg.num_antennas = m;
        std::vector<double> t;
        for (std::uint64_t n = 0; n < 5; ++n) {
            const auto ch = draw_realization(cfg, master.substream({1, std::uint64_t(m), n}));
            const auto t0 = Clock::now();
            const auto r = rlx_prox(ch, cfg, master.substream({2, std::uint64_t(m), n}));
            t.push_back(seconds_since(t0));
            (void)r;
        }
        const double med = median(t);
        lx.push_back(std::log(double(m)));
        ly.push_back(std::log(med));
        d << " M=" << m << ": " << fmt("%.3f", med) << " s";
    }
    const double n = double(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sx += lx[k];
        sy += ly[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    d << "; log-log slope " << fmt("%.2f", slope) << " (<= 3.4)";
    return {slope <= 3.4, d.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("fdsplit_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string files[2];
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
        const fs::path out = dir / ("run" + std::to_string(k) + ".csv");
        const std::string cmd = std::string("\"") + FDSPLIT_CLI_PATH + "\" cdf --seed 1234 --iters 5 --out \"" +
                                out.string() + "\" > /dev/null";
        ran = ran && std::system(cmd.c_str()) == 0;
        files[k] = slurp(out);
    }
    fs::remove_all(dir);
    const auto lines = std::count(files[0].begin(), files[0].end(), '\n');
    const bool same = files[0] == files[1];
    return {ran && same && lines == 1 + 5 * 3,
            std::string(same ? "identical" : "different") + " CSV (" + std::to_string(files[0].size()) + " bytes, " +
                std::to_string(lines) + " lines)"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
    double runtime_limit; // seconds, <= 0 for none
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all{
        {1, "decomposition difference form", decomposition_difference_form, 10},
        {2, "coupling gradient vs finite differences", coupling_gradient, 5},
        {3, "trace/diag identity suite", identities_suite, 5},
        {4, "MMSE filter optimality", mmse_optimality, 0},
        {5, "closed-form MSE vs symbol simulation", mse_expectation, 60},
        {6, "optimality gap at M = 8, -100 dB", optimality_gap, 15 * 60},
        {7, "SI sweep trend at M = 8", si_sweep, 20 * 60},
        {8, "antenna sweep trend at -100 dB", antenna_sweep, 30 * 60},
        {9, "complexity scaling", complexity_scaling, 0},
        {10, "cdf CSV determinism", cli_determinism, 0},
    };
    std::set<int> only, expected;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "--expect-fail" && k + 1 < argc)
            expected.insert(std::atoi(argv[++k]));
        else
            only.insert(std::atoi(argv[k]));
    }

    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id))
            continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        o = with_time_limit(o, seconds_since(t0), c.runtime_limit);
        if (!o.pass && expected.count(c.id))
            o.detail += " [expected failure]";
        else if (!o.pass)
            ++failed;
        std::printf("%s %2d %-40s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
