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

#include "fdsplit/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdsplit {

namespace {

// substream keys
constexpr std::uint64_t kPositions = 1;
constexpr std::uint64_t kChannels = 2;
constexpr std::uint64_t kUl = 11;
constexpr std::uint64_t kDl = 12;
constexpr std::uint64_t kUeUe = 13;
constexpr std::uint64_t kSi = 14;
constexpr std::uint64_t kBeam = 15;

Point uniform_in_disc(double radius, double min_distance, RandomStream& rng)
{
    const double r = std::max(radius * std::sqrt(rng.uniform()), min_distance);
    const double phi = 2.0 * M_PI * rng.uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
}

double to_km(double distance_m) { return distance_m * 1e-3; }

} // namespace

double Point::norm() const { return std::hypot(x, y); }

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double PicoPathLoss::los_db(double distance_m)
{
    return los_intercept_db + los_slope * std::log10(to_km(distance_m));
}

double PicoPathLoss::nlos_db(double distance_m)
{
    return nlos_intercept_db + nlos_slope * std::log10(to_km(distance_m));
}

double PicoPathLoss::los_probability(double distance_m)
{
    const double r = to_km(distance_m);
    return 0.5 - std::min(0.5, 5.0 * std::exp(-0.156 / r)) + std::min(0.5, 5.0 * std::exp(-r / 0.03));
}

LinkModel LinkModel::from_config(const SystemConfig& cfg)
{
    LinkModel m;
    m.shadowing_los_db = cfg.shadowing_los_db;
    m.shadowing_nlos_db = cfg.shadowing_nlos_db;
    return m;
}

Positions draw_positions(const SystemConfig& cfg, RandomStream& rng)
{
    Positions p;
    p.ul.reserve(static_cast<std::size_t>(cfg.num_ul));
    p.dl.reserve(static_cast<std::size_t>(cfg.num_dl));
    for (int i = 0; i < cfg.num_ul; ++i)
        p.ul.push_back(uniform_in_disc(cfg.cell_radius, cfg.min_distance, rng));
    for (int j = 0; j < cfg.num_dl; ++j)
        p.dl.push_back(uniform_in_disc(cfg.cell_radius, cfg.min_distance, rng));
    return p;
}

double link_gain(double distance_m, RandomStream& rng, const LinkModel& model)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("link_gain: distance must be positive");

    // Always consume the same number of draws so streams stay aligned
    // whatever the options are.
    const double u = rng.uniform();
    const double z = rng.normal();

    bool los = false;
    switch (model.los) {
    case LosMode::ForceLos: los = true; break;
    case LosMode::ForceNlos: los = false; break;
    case LosMode::Random: los = u < PicoPathLoss::los_probability(distance_m); break;
    }
    const double pl = los ? PicoPathLoss::los_db(distance_m) : PicoPathLoss::nlos_db(distance_m);
    const double sigma = los ? model.shadowing_los_db : model.shadowing_nlos_db;
    const double shadow = model.shadowing ? sigma * z : 0.0;
    return std::pow(10.0, -(pl + shadow) / 10.0);
}

CMatrixd draw_si_channel(const SystemConfig& cfg, RandomStream& rng)
{
    const auto M = cfg.num_antennas;
    const double s = cfg.si_cancellation;
    const double k = cfg.rician_k;
    double mean = 0.0;
    double sd = 0.0;
    if (std::isinf(k)) {
        mean = std::sqrt(s);
    } else {
        mean = std::sqrt(s * k / (1.0 + k));
        sd = std::sqrt(s / (1.0 + k));
    }
    CMatrixd h(M, M);
    for (Eigen::Index c = 0; c < M; ++c)
        for (Eigen::Index r = 0; r < M; ++r)
            h(r, c) = mean + sd * rng.complex_normal();
    return h;
}

CMatrixd draw_beamformers(const SystemConfig& cfg, RandomStream& rng)
{
    CMatrixd w(cfg.num_antennas, cfg.num_dl);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            w(r, c) = rng.complex_normal();
    w *= std::sqrt(cfg.p_dl_watts()) / w.norm();
    return w;
}

ChannelRealization draw_channels(const SystemConfig& cfg, const Positions& positions, RandomStream& rng,
                                 const DrawOptions& opts)
{
    const auto M = cfg.num_antennas;
    const auto I = static_cast<Eigen::Index>(positions.ul.size());
    const auto J = static_cast<Eigen::Index>(positions.dl.size());
    const Point bs{};

    auto small_scale = [&opts](RandomStream& s) -> std::complex<double> {
        const auto v = s.complex_normal();
        return opts.small_scale_fading ? v : std::complex<double>(1.0, 0.0);
    };

    ChannelRealization ch;
    ch.h_ul.resize(M, I);
    ch.h_dl.resize(M, J);
    ch.g_ue.resize(I, J);

    for (Eigen::Index i = 0; i < I; ++i) {
        auto s = rng.substream({kUl, static_cast<std::uint64_t>(i)});
        const double amp = std::sqrt(link_gain(distance(bs, positions.ul[i]), s, opts.link));
        for (Eigen::Index m = 0; m < M; ++m)
            ch.h_ul(m, i) = amp * small_scale(s);
    }
    for (Eigen::Index j = 0; j < J; ++j) {
        auto s = rng.substream({kDl, static_cast<std::uint64_t>(j)});
        const double amp = std::sqrt(link_gain(distance(bs, positions.dl[j]), s, opts.link));
        for (Eigen::Index m = 0; m < M; ++m)
            ch.h_dl(m, j) = amp * small_scale(s);
    }
    for (Eigen::Index i = 0; i < I; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            auto s = rng.substream({kUeUe, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
            // Co-located UEs would make the path loss singular.
            const double d = std::max(distance(positions.ul[i], positions.dl[j]), 1e-3);
            const double amp = std::sqrt(link_gain(d, s, opts.link));
            ch.g_ue(i, j) = amp * small_scale(s);
        }
    }

    auto si_stream = rng.substream(kSi);
    ch.h_si = draw_si_channel(cfg, si_stream);
    auto beam_stream = rng.substream(kBeam);
    SystemConfig beam_cfg = cfg;
    beam_cfg.num_dl = static_cast<int>(J);
    ch.w_dl = draw_beamformers(beam_cfg, beam_stream);

    ch.q_ul = RVectord::Constant(I, cfg.p_ul_watts());
    ch.noise_var_bs = cfg.noise_var_bs();
    ch.noise_var_ue = cfg.noise_var_ue();
    ch.tx_distortion = cfg.tx_distortion;
    ch.rx_distortion = cfg.rx_distortion;
    return ch;
}

ChannelRealization draw_channels(const SystemConfig& cfg, const Positions& positions, RandomStream& rng)
{
    DrawOptions opts;
    opts.link = LinkModel::from_config(cfg);
    return draw_channels(cfg, positions, rng, opts);
}

ChannelRealization draw_realization(const SystemConfig& cfg, const RandomStream& rng)
{
    auto pos_stream = rng.substream(kPositions);
    const auto positions = draw_positions(cfg, pos_stream);
    auto ch_stream = rng.substream(kChannels);
    return draw_channels(cfg, positions, ch_stream);
}

} // namespace fdsplit
