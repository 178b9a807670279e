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


#include "fdsplit/baselines.hpp"
#include "fdsplit/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace fdsplit;

namespace {

SystemConfig small_config()
{
    SystemConfig cfg;
    cfg.num_antennas = 4;
    cfg.num_ul = 2;
    cfg.num_dl = 2;
    cfg.num_restarts = 2;
    return cfg;
}

std::string run_to_string(const ExperimentSpec& spec, const SystemConfig& cfg)
{
    std::ostringstream os;
    CsvWriter w(os);
    run_experiment(spec, cfg, [&w](const RunRecord& r) { w.write(r); });
    return os.str();
}

RunRecord rec(Method m, double se, double mse = 1.0, int M = 8, double si = -100)
{
    RunRecord r;
    r.method = m;
    r.sum_se = se;
    r.sum_mse = mse;
    r.num_antennas = M;
    r.si_db = si;
    return r;
}

} // namespace

TEST_CASE("zero realizations give a header-only CSV")
{
    ExperimentSpec spec;
    spec.monte_carlo_iters = 0;
    CHECK(run_to_string(spec, small_config()) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("reruns are byte-identical and methods share realizations")
{
    ExperimentSpec spec;
    spec.experiment = Experiment::SweepSi;
    spec.monte_carlo_iters = 3;
    spec.si_levels_db = {-60, -90};
    spec.seed = 41;
    const auto cfg = small_config();
    const std::string a = run_to_string(spec, cfg);
    CHECK(a == run_to_string(spec, cfg));

    const auto recs = run_experiment(spec, cfg);
    REQUIRE(recs.size() == 2 * 3 * 3);
    for (std::size_t k = 0; k < recs.size(); k += 3) {
        CHECK(recs[k].method == Method::Rlx);
        CHECK(recs[k + 1].method == Method::Exh);
        CHECK(recs[k + 2].method == Method::Split);
        CHECK(recs[k].fingerprint == recs[k + 1].fingerprint);
        CHECK(recs[k].fingerprint == recs[k + 2].fingerprint);
        CHECK(recs[k + 1].sum_mse <= recs[k].sum_mse + 1e-12);
        CHECK(recs[k + 1].sum_mse <= recs[k + 2].sum_mse + 1e-12);
        CHECK(recs[k].wall_ms == 0.0);
    }
    // different seed, different draws
    spec.seed = 42;
    CHECK(run_to_string(spec, cfg) != a);
}

TEST_CASE("CSV rows")
{
    RunRecord r = rec(Method::Exh, 12.5, 0.75, 8, -70);
    r.experiment = Experiment::SweepSi;
    r.realization = 3;
    r.seed = 9;
    CHECK(csv_row(r) == "sweep_si,8,-70,3,exh,0.75,12.5,0,1,0,9");
    r.failed = true;
    r.iterations = 4;
    CHECK(csv_row(r) == "sweep_si,8,-70,3,exh,nan,nan,4,failed,0,9");
    CHECK(std::string(kCsvHeader) ==
          "experiment,M,si_db,realization,method,sum_mse,sum_se_bits,iterations,converged,wall_ms,seed");
    CHECK_THROWS_AS(CsvWriter("/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("empirical CDF")
{
    CHECK(aggregate_cdf({rec(Method::Rlx, 5.0)}, Method::Rlx) == std::vector<std::pair<double, double>>{{5.0, 1.0}});
    CHECK(aggregate_cdf({rec(Method::Rlx, 7.0), rec(Method::Split, 1.0), rec(Method::Rlx, 3.0)}, Method::Rlx) ==
          std::vector<std::pair<double, double>>{{3.0, 0.5}, {7.0, 1.0}});
    CHECK_THROWS_AS(aggregate_cdf({rec(Method::Rlx, 1.0)}, Method::Exh), std::invalid_argument);

    std::vector<RunRecord> many;
    for (int k = 600; k >= 1; --k)
        many.push_back(rec(Method::Split, k));
    auto failed = rec(Method::Split, 0.0);
    failed.failed = true;
    many.push_back(failed);
    const auto cdf = aggregate_cdf(many, Method::Split);
    REQUIRE(cdf.size() == 600);
    CHECK(cdf[299] == std::pair<double, double>{300.0, 0.5});
    CHECK(cdf.back().second == 1.0);
}

TEST_CASE("group means")
{
    const std::vector<RunRecord> rs{rec(Method::Rlx, 10, 1.0, 8, -50), rec(Method::Rlx, 20, 2.0, 8, -100),
                                    rec(Method::Split, 4, 3.0, 8, -50), rec(Method::Split, 6, 5.0, 8, -100)};
    const auto by_method = aggregate_mean(rs, {GroupKey::Method});
    REQUIRE(by_method.size() == 2);
    CHECK(by_method[0].method == Method::Rlx);
    CHECK(by_method[0].mean_se == 15.0);
    CHECK(by_method[0].mean_mse == 1.5);
    CHECK(by_method[0].count == 2);
    CHECK(by_method[1].mean_se == 5.0);

    const auto by_si = aggregate_mean(rs, {GroupKey::Method, GroupKey::SiDb});
    REQUIRE(by_si.size() == 4);
    CHECK(by_si[0].si_db == -100);
    CHECK(by_si[0].mean_se == 20.0);

    const auto grand = aggregate_mean(rs, {});
    REQUIRE(grand.size() == 1);
    CHECK(grand[0].mean_se == 10.0);
    CHECK(grand[0].count == 4);
    CHECK(aggregate_mean({}, {GroupKey::Method}).empty());
}

TEST_CASE("experiment settings")
{
    KeyValues kv{{"methods", "split,rlx"}, {"monte_carlo_iters", "7"}, {"si_levels_db", "-55, -65"},
                 {"bogus", "1"}};
    const auto spec = apply_experiment_keys(kv, ExperimentSpec{});
    CHECK(kv.size() == 1);
    CHECK(kv.count("bogus") == 1);
    CHECK(spec.monte_carlo_iters == 7);
    CHECK(spec.ordered_methods() == std::vector<Method>{Method::Rlx, Method::Split});
    CHECK(spec.si_levels_db == std::vector<double>{-55, -65});

    CHECK_THROWS_AS(parse_method("greedy"), ConfigError);
    CHECK_THROWS_AS(parse_method_list(""), ConfigError);
    CHECK(parse_experiment("sweep-si") == Experiment::SweepSi);
    CHECK(parse_experiment("sweep_antennas") == Experiment::SweepAntennas);

    ExperimentSpec big;
    big.experiment = Experiment::SweepAntennas;
    big.antenna_counts = {8, 32};
    CHECK_THROWS_AS(big.validate(SystemConfig{}), CapacityError);
    big.methods = {Method::Rlx, Method::Split};
    CHECK_NOTHROW(big.validate(SystemConfig{}));
    big.monte_carlo_iters = -1;
    CHECK_THROWS_AS(big.validate(SystemConfig{}), ConfigError);

    const auto desk = profile_spec(Profile::Desk, Experiment::SweepSi);
    CHECK(desk.monte_carlo_iters == 100);
    CHECK(desk.si_levels_db == std::vector<double>{-50, -75, -100});
    CHECK(profile_spec(Profile::Full, Experiment::Cdf).monte_carlo_iters == 600);
    CHECK(profile_spec(Profile::Full, Experiment::Single).monte_carlo_iters == 1);
}
