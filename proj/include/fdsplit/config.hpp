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

#ifndef FDSPLIT_CONFIG_HPP
#define FDSPLIT_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace fdsplit {

// How RLX-PROX turns its relaxed point into a binary assignment.
//   Nearest: per-coordinate threshold 0.5 with a repair of degenerate splits.
//   OrderedThreshold: rank antennas by their UL share and keep the best
//   "top k are UL" split, scored with fresh MMSE filters.
enum class RoundingRule { Nearest, OrderedThreshold };

class ConfigError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Scenario and algorithm constants. Defaults reproduce the pico-cell
// simulation table: 40 m cell, I = J = 4, 2 GHz / 10 MHz, -174.4 dBm/Hz,
// NF 13/9 dB, kappa = beta = -120 dB, K_r = 1, P_dl/P_ul = 30/23 dBm,
// (eps, alpha, rho, L) = (1e-3, 1, 0.9, 20).
//
// dB-valued quantities that enter the math as linear factors (kappa, beta,
// sigma_SI^2) are stored linear; the config-file keys carry the dB values.
struct SystemConfig {
    int num_antennas = 8;
    int num_ul = 4;
    int num_dl = 4;

    double cell_radius = 40.0;    // m
    double min_distance = 3.0;    // m, BS-UE clamp
    double carrier_freq = 2.0e9;  // Hz
    double bandwidth = 10.0e6;    // Hz
    double noise_psd = -174.4;    // dBm/Hz
    double noise_figure_bs = 13.0; // dB
    double noise_figure_ue = 9.0;  // dB
    double shadowing_los_db = 3.0;
    double shadowing_nlos_db = 4.0;

    double tx_distortion = 1e-12;   // kappa
    double rx_distortion = 1e-12;   // beta
    double si_cancellation = 1e-10; // sigma_SI^2
    double rician_k = 1.0;

    double p_dl_max = 30.0; // dBm
    double p_ul_max = 23.0; // dBm

    double epsilon = 1e-3;
    double alpha = 1.0;
    double rho = 0.9;
    int num_restarts = 20;
    int max_iters = 500;
    RoundingRule rounding = RoundingRule::OrderedThreshold;

    bool exclude_degenerate = false; // EXH search space
    std::uint64_t seed = 1;

    double p_dl_watts() const { return dbm_to_watts(p_dl_max); }
    double p_ul_watts() const { return dbm_to_watts(p_ul_max); }
    double noise_var_bs() const;
    double noise_var_ue() const;

    // Throws ConfigError naming the first broken invariant.
    void validate() const;
};

// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
// Duplicate keys are an error.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_value_file(const std::string& path);

// Consumes every SystemConfig key present in kv (erasing it) and returns the
// updated config. Keys ending in _db / _dbm hold dB quantities.
SystemConfig apply_system_keys(KeyValues& kv, SystemConfig base = {});

double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
RoundingRule parse_rounding(const std::string& key, const std::string& value);
const char* to_string(RoundingRule r);

} // namespace fdsplit

#endif
