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

#include "fdsplit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace fdsplit {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

double SystemConfig::noise_var_bs() const
{
    return dbm_to_watts(noise_psd + 10.0 * std::log10(bandwidth) + noise_figure_bs);
}

double SystemConfig::noise_var_ue() const
{
    return dbm_to_watts(noise_psd + 10.0 * std::log10(bandwidth) + noise_figure_ue);
}

void SystemConfig::validate() const
{
    auto check = [](bool ok, const char* msg) {
        if (!ok)
            throw ConfigError(msg);
    };
    check(num_antennas >= 2, "num_antennas must be >= 2");
    check(num_ul >= 1, "num_ul must be >= 1");
    check(num_dl >= 1, "num_dl must be >= 1");
    check(cell_radius >= 0.0 && std::isfinite(cell_radius), "cell_radius must be finite and >= 0");
    check(min_distance > 0.0, "min_distance must be > 0");
    check(carrier_freq > 0.0, "carrier_freq must be > 0");
    check(bandwidth > 0.0, "bandwidth must be > 0");
    check(shadowing_los_db >= 0.0 && shadowing_nlos_db >= 0.0, "shadowing std must be >= 0");
    check(tx_distortion >= 0.0 && rx_distortion >= 0.0, "distortion levels must be >= 0");
    check(si_cancellation > 0.0, "si_cancellation must be > 0");
    check(rician_k >= 0.0, "rician_k must be >= 0");
    check(epsilon > 0.0, "epsilon must be > 0");
    check(alpha > 0.0, "alpha must be > 0");
    check(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    check(num_restarts >= 1, "num_restarts must be >= 1");
    check(max_iters >= 1, "max_iters must be >= 1");
}

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_value_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_key_values(in);
}

double parse_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v))
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value)
{
    long long v = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "1" || value == "true" || value == "yes")
        return true;
    if (value == "0" || value == "false" || value == "no")
        return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + value + "'");
}

RoundingRule parse_rounding(const std::string& key, const std::string& value)
{
    if (value == "nearest")
        return RoundingRule::Nearest;
    if (value == "ordered_threshold")
        return RoundingRule::OrderedThreshold;
    throw ConfigError("key '" + key + "': expected nearest or ordered_threshold, got '" + value + "'");
}

const char* to_string(RoundingRule r)
{
    return r == RoundingRule::Nearest ? "nearest" : "ordered_threshold";
}

SystemConfig apply_system_keys(KeyValues& kv, SystemConfig cfg)
{
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto real = [](double& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = parse_double(k, v); };
    };
    auto from_db = [](double& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = db_to_linear(parse_double(k, v)); };
    };
    auto integer = [](int& field) -> Setter {
        return [&field](const std::string& k, const std::string& v) { field = static_cast<int>(parse_int(k, v)); };
    };

    const std::map<std::string, Setter> setters = {
        {"num_antennas", integer(cfg.num_antennas)},
        {"num_ul", integer(cfg.num_ul)},
        {"num_dl", integer(cfg.num_dl)},
        {"cell_radius", real(cfg.cell_radius)},
        {"min_distance", real(cfg.min_distance)},
        {"carrier_freq", real(cfg.carrier_freq)},
        {"bandwidth", real(cfg.bandwidth)},
        {"noise_psd", real(cfg.noise_psd)},
        {"noise_figure_bs", real(cfg.noise_figure_bs)},
        {"noise_figure_ue", real(cfg.noise_figure_ue)},
        {"shadowing_los_db", real(cfg.shadowing_los_db)},
        {"shadowing_nlos_db", real(cfg.shadowing_nlos_db)},
        {"tx_distortion_db", from_db(cfg.tx_distortion)},
        {"rx_distortion_db", from_db(cfg.rx_distortion)},
        {"si_cancellation_db", from_db(cfg.si_cancellation)},
        {"rician_k", real(cfg.rician_k)},
        {"p_dl_max", real(cfg.p_dl_max)},
        {"p_ul_max", real(cfg.p_ul_max)},
        {"epsilon", real(cfg.epsilon)},
        {"alpha", real(cfg.alpha)},
        {"rho", real(cfg.rho)},
        {"num_restarts", integer(cfg.num_restarts)},
        {"max_iters", integer(cfg.max_iters)},
        {"rounding", [&cfg](const std::string& k, const std::string& v) { cfg.rounding = parse_rounding(k, v); }},
        {"exclude_degenerate",
         [&cfg](const std::string& k, const std::string& v) { cfg.exclude_degenerate = parse_bool(k, v); }},
        {"seed",
         [&cfg](const std::string& k, const std::string& v) {
             std::uint64_t s = 0;
             auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
             if (ec != std::errc{} || ptr != v.data() + v.size())
                 throw ConfigError("key '" + k + "': not an unsigned integer: '" + v + "'");
             cfg.seed = s;
         }},
    };

    for (auto it = kv.begin(); it != kv.end();) {
        if (auto s = setters.find(it->first); s != setters.end()) {
            s->second(it->first, it->second);
            it = kv.erase(it);
        } else {
            ++it;
        }
    }
    return cfg;
}

} // namespace fdsplit
