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

#ifndef FDSPLIT_HARNESS_HPP
#define FDSPLIT_HARNESS_HPP

// Monte Carlo driver: sweep points x realizations x methods, one CSV row
// per run.
//
// Realization n at antenna count M is drawn from the substream (1, M, n) of
// the master seed, independently of the SI level, so an SI sweep reuses the
// same geometry and fading at every level. RLX-PROX restarts draw from
// (2, M, n). Every method at a sweep point sees the same realization.

#include "fdsplit/config.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fdsplit {

class IoError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { Single, Cdf, SweepSi, SweepAntennas };
enum class Method { Rlx, Exh, Split }; // also the row order inside a realization

const char* to_string(Experiment e);
const char* to_string(Method m);
Experiment parse_experiment(const std::string& s);
Method parse_method(const std::string& s);
std::vector<Method> parse_method_list(const std::string& csv); // "rlx,exh,split"

struct ExperimentSpec {
    Experiment experiment = Experiment::Cdf;
    std::vector<Method> methods{Method::Rlx, Method::Exh, Method::Split};
    int monte_carlo_iters = 600;
    std::vector<double> si_levels_db{-50, -60, -70, -80, -90, -100};
    std::vector<int> antenna_counts{8, 16, 32, 64};
    std::string output_path;
    std::uint64_t seed = 1;
    bool record_wall_time = false; // off keeps the CSV byte-reproducible

    // Methods sorted into row order, duplicates dropped.
    std::vector<Method> ordered_methods() const;

    // (M, si_db) pairs visited, in output order.
    std::vector<std::pair<int, double>> sweep_points(const SystemConfig& cfg) const;

    // ConfigError on bad values, CapacityError if EXH meets M > 20.
    void validate(const SystemConfig& cfg) const;
};

enum class Profile { Full, Desk }; // --profile paper | desk
Profile parse_profile(const std::string& s);

// Full: 600 realizations, SI -50..-100 dB in 10 dB steps, M = 8..64.
// Desk: 100 realizations, M = 8, SI {-50, -75, -100} dB.
ExperimentSpec profile_spec(Profile p, Experiment e);

// Consumes experiment keys (methods, monte_carlo_iters, si_levels_db,
// antenna_counts, output_path, seed) from kv.
ExperimentSpec apply_experiment_keys(KeyValues& kv, ExperimentSpec base);

struct RunRecord {
    Experiment experiment = Experiment::Cdf;
    int num_antennas = 0;
    double si_db = 0;
    int realization = 0;
    Method method = Method::Rlx;
    double sum_mse = 0;
    double sum_se = 0;
    int iterations = 0;     // PSCA iterations of the selected restart; 0 for baselines
    bool converged = true;  // baselines are exact
    double wall_ms = 0;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0; // hash of the channel realization used
    bool failed = false;
    std::string error;
};

inline constexpr const char* kCsvHeader =
    "experiment,M,si_db,realization,method,sum_mse,sum_se_bits,iterations,converged,wall_ms,seed";

std::string csv_row(const RunRecord& r);

// Writes the header on construction and one flushed row per record.
class CsvWriter {
 public:
    explicit CsvWriter(const std::string& path);
    explicit CsvWriter(std::ostream& out);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write(const RunRecord& r);

 private:
    std::unique_ptr<std::ostream> owned_;
    std::ostream* out_;
    std::string path_;
    void check();
};

using RecordSink = std::function<void(const RunRecord&)>;

// Runs every (sweep point, realization, method) in output order; each record
// is handed to `sink` (if any) as soon as it exists.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg,
                                      const RecordSink& sink = {});

// Empirical CDF of sum SE for one method: ascending values with k/N.
// Failed records are skipped; throws std::invalid_argument when none remain.
std::vector<std::pair<double, double>> aggregate_cdf(const std::vector<RunRecord>& records, Method method);

enum class GroupKey { Method, NumAntennas, SiDb };

struct GroupMean {
    Method method = Method::Rlx;
    int num_antennas = 0;
    double si_db = 0;
    double mean_se = 0;
    double mean_mse = 0;
    int count = 0;
};

// Mean sum SE and MSE per group of the chosen keys (keys not chosen are left
// at their defaults). Failed records are skipped; empty groups never appear.
std::vector<GroupMean> aggregate_mean(const std::vector<RunRecord>& records, const std::vector<GroupKey>& keys);

} // namespace fdsplit

#endif
