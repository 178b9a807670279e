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

#ifndef FDSPLIT_CHANNEL_HPP
#define FDSPLIT_CHANNEL_HPP

#include "fdsplit/config.hpp"
#include "fdsplit/rng.hpp"
#include "fdsplit/types.hpp"

#include <cstdint>
#include <cstring>
#include <vector>

namespace fdsplit {

// One problem instance: every channel, power and beamformer an MSE
// evaluation needs, plus the noise and distortion levels. Columns of h_ul,
// h_dl and w_dl are per user.
template <typename Real>
struct BasicChannelRealization {
    CMatrix<Real> h_ul; // M x I
    CMatrix<Real> h_dl; // M x J
    CMatrix<Real> h_si; // M x M, DL antenna (column) -> UL antenna (row)
    CMatrix<Real> g_ue; // I x J, UL user i -> DL user j
    RVector<Real> q_ul; // I, watts
    CMatrix<Real> w_dl; // M x J
    Real noise_var_bs = 0;
    Real noise_var_ue = 0;
    Real tx_distortion = 0; // kappa
    Real rx_distortion = 0; // beta

    Eigen::Index num_antennas() const { return h_si.rows(); }
    Eigen::Index num_ul() const { return h_ul.cols(); }
    Eigen::Index num_dl() const { return h_dl.cols(); }

    // Throws ContractViolation on inconsistent shapes or non-finite data.
    void validate() const
    {
        const auto M = num_antennas();
        require(h_si.cols() == M, "h_si must be square");
        require(h_ul.rows() == M && h_dl.rows() == M && w_dl.rows() == M, "channel row count must equal M");
        require(w_dl.cols() == num_dl(), "w_dl must have one column per DL user");
        require(q_ul.size() == num_ul(), "q_ul must have one entry per UL user");
        require(g_ue.rows() == num_ul() && g_ue.cols() == num_dl(), "g_ue must be I x J");
        require(h_ul.allFinite() && h_dl.allFinite() && h_si.allFinite() && g_ue.allFinite() &&
                    q_ul.allFinite() && w_dl.allFinite(),
                "channel realization contains non-finite entries");
        require((q_ul.array() >= 0).all(), "UL powers must be nonnegative");
        require(noise_var_bs > 0 && noise_var_ue > 0, "noise variances must be positive");
        require(tx_distortion >= 0 && rx_distortion >= 0, "distortion levels must be nonnegative");
    }

    template <typename Other>
    BasicChannelRealization<Other> cast() const
    {
        BasicChannelRealization<Other> out;
        out.h_ul = h_ul.template cast<Complex<Other>>();
        out.h_dl = h_dl.template cast<Complex<Other>>();
        out.h_si = h_si.template cast<Complex<Other>>();
        out.g_ue = g_ue.template cast<Complex<Other>>();
        out.q_ul = q_ul.template cast<Other>();
        out.w_dl = w_dl.template cast<Complex<Other>>();
        out.noise_var_bs = static_cast<Other>(noise_var_bs);
        out.noise_var_ue = static_cast<Other>(noise_var_ue);
        out.tx_distortion = static_cast<Other>(tx_distortion);
        out.rx_distortion = static_cast<Other>(rx_distortion);
        return out;
    }

    // FNV-1a over the raw bytes of every field; used to prove that paired
    // methods saw the same realization.
    std::uint64_t fingerprint() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto eat = [&h](const void* p, std::size_t n) {
            const auto* b = static_cast<const unsigned char*>(p);
            for (std::size_t k = 0; k < n; ++k) {
                h ^= b[k];
                h *= 0x100000001b3ULL;
            }
        };
        auto eat_mat = [&eat](const auto& m) {
            const Eigen::Index dims[2] = {m.rows(), m.cols()};
            eat(dims, sizeof(dims));
            eat(m.data(), sizeof(*m.data()) * static_cast<std::size_t>(m.size()));
        };
        eat_mat(h_ul);
        eat_mat(h_dl);
        eat_mat(h_si);
        eat_mat(g_ue);
        eat_mat(q_ul);
        eat_mat(w_dl);
        const Real scalars[4] = {noise_var_bs, noise_var_ue, tx_distortion, rx_distortion};
        eat(scalars, sizeof(scalars));
        return h;
    }
};

using ChannelRealization = BasicChannelRealization<double>;

struct Point {
    double x = 0;
    double y = 0;
    double norm() const;
};

double distance(const Point& a, const Point& b);

// UE positions; the BS sits at the origin.
struct Positions {
    std::vector<Point> ul;
    std::vector<Point> dl;
};

enum class LosMode { Random, ForceLos, ForceNlos };

// Pico-cell large-scale model (3GPP TR 36.828 Table 6.2-1, pico <-> UE,
// identical to TR 36.814 Table A.2.1.1.2-3). R in km:
//   LOS:  PL = 103.8 + 20.9 log10(R)
//   NLOS: PL = 145.4 + 37.5 log10(R)
//   P_LOS = 0.5 - min(0.5, 5 exp(-0.156/R)) + min(0.5, 5 exp(-R/0.03))
// Check point: R = 0.1 km gives LOS 82.9 dB, NLOS 107.9 dB, P_LOS 0.178.
struct PicoPathLoss {
    static constexpr double los_intercept_db = 103.8;
    static constexpr double los_slope = 20.9;
    static constexpr double nlos_intercept_db = 145.4;
    static constexpr double nlos_slope = 37.5;

    static double los_db(double distance_m);
    static double nlos_db(double distance_m);
    static double los_probability(double distance_m);
};

struct LinkModel {
    double shadowing_los_db = 3.0;
    double shadowing_nlos_db = 4.0;
    bool shadowing = true;
    LosMode los = LosMode::Random;

    static LinkModel from_config(const SystemConfig& cfg);
};

struct DrawOptions {
    bool small_scale_fading = true; // false: unit small-scale term
    LinkModel link;
};

// Uniform placement of I UL and J DL users in the cell disc; distances to
// the BS are clamped to cfg.min_distance.
Positions draw_positions(const SystemConfig& cfg, RandomStream& rng);

// Linear power gain 10^(-(PL + S)/10) with LOS/NLOS drawn from the pico
// LOS-probability curve. Throws std::domain_error for distance <= 0.
double link_gain(double distance_m, RandomStream& rng, const LinkModel& model = {});

// Rician SI channel: i.i.d. entries CN(sqrt(s K/(1+K)), s/(1+K)), s = sigma_SI^2.
// K_r = +inf gives the deterministic sqrt(s) matrix.
CMatrixd draw_si_channel(const SystemConfig& cfg, RandomStream& rng);

// Gaussian columns scaled to total power P_dl_max (watts).
CMatrixd draw_beamformers(const SystemConfig& cfg, RandomStream& rng);

ChannelRealization draw_channels(const SystemConfig& cfg, const Positions& positions, RandomStream& rng,
                                 const DrawOptions& opts);
ChannelRealization draw_channels(const SystemConfig& cfg, const Positions& positions, RandomStream& rng);

// Positions and channels for one Monte Carlo draw, each from its own
// substream of rng.
ChannelRealization draw_realization(const SystemConfig& cfg, const RandomStream& rng);

} // namespace fdsplit

#endif
