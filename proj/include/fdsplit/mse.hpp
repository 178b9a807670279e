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

#ifndef FDSPLIT_MSE_HPP
#define FDSPLIT_MSE_HPP

#include "fdsplit/channel.hpp"
#include "fdsplit/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace fdsplit {

// UL share of each BS antenna. Entries lie in [0, 1] (relaxed) or {0, 1}
// (binary); the DL share is always 1 - x_ul and is never stored, so every
// antenna is used in exactly one direction.
template <typename Real>
class BasicAntennaAssignment {
 public:
    BasicAntennaAssignment() = default;

    explicit BasicAntennaAssignment(RVector<Real> x_ul) : x_ul_(std::move(x_ul))
    {
        require(x_ul_.allFinite(), "assignment must be finite");
        require((x_ul_.array() >= Real(0)).all() && (x_ul_.array() <= Real(1)).all(),
                "assignment entries must lie in [0, 1]");
    }

    // Bit k of `bits` sets antenna k to UL.
    static BasicAntennaAssignment from_bits(std::uint64_t bits, Eigen::Index num_antennas)
    {
        RVector<Real> x(num_antennas);
        for (Eigen::Index k = 0; k < num_antennas; ++k)
            x(k) = ((bits >> k) & 1U) ? Real(1) : Real(0);
        return BasicAntennaAssignment(std::move(x));
    }

    const RVector<Real>& ul() const { return x_ul_; }
    RVector<Real> dl() const { return RVector<Real>::Ones(x_ul_.size()) - x_ul_; }
    Eigen::Index size() const { return x_ul_.size(); }

    bool is_binary() const
    {
        return ((x_ul_.array() == Real(0)) || (x_ul_.array() == Real(1))).all();
    }

 private:
    RVector<Real> x_ul_;
};

using AntennaAssignment = BasicAntennaAssignment<double>;

template <typename Real>
struct BasicReceiveFilters {
    CMatrix<Real> r_ul; // M x I, column i decodes UL user i as r^H y
    CVector<Real> r_dl; // J
};

using ReceiveFilters = BasicReceiveFilters<double>;

template <typename Real>
struct BasicMseReport {
    RVector<Real> mse_ul;
    RVector<Real> mse_dl;
    Real sum_mse = 0;
    Real sum_se = 0; // bits/s/Hz; NaN when some MSE lies outside (0, 1]
};

using MseReport = BasicMseReport<double>;

template <typename Real>
struct EffectiveChannels {
    CMatrix<Real> h_ul; // X^u H^u
    CMatrix<Real> h_dl; // X^d H^d
    CMatrix<Real> h_si; // X^u H_SI X^d
};

// Antennas with x_ul above this participate in the UL inverse.
inline constexpr double kActiveThreshold = 1e-9;

namespace detail {

template <typename Real>
void check_shapes(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x)
{
    require(x.size() == ch.num_antennas(), "assignment length must equal the number of antennas");
}

} // namespace detail

template <typename Real>
EffectiveChannels<Real> effective_channels(const BasicChannelRealization<Real>& ch,
                                           const BasicAntennaAssignment<Real>& x)
{
    detail::check_shapes(ch, x);
    const RVector<Real> xu = x.ul();
    const RVector<Real> xd = x.dl();
    EffectiveChannels<Real> eff;
    eff.h_ul = xu.template cast<Complex<Real>>().asDiagonal() * ch.h_ul;
    eff.h_dl = xd.template cast<Complex<Real>>().asDiagonal() * ch.h_dl;
    eff.h_si = xu.template cast<Complex<Real>>().asDiagonal() * ch.h_si *
               xd.template cast<Complex<Real>>().asDiagonal();
    return eff;
}

// Covariance of the masked UL receive vector, q_i h_i h_i^H + Psi_i^u, which
// is the same matrix for every UL user i:
//   (1+kappa) sum_l q_l h~_l h~_l^H + H~_SI (S + kappa diag S) H~_SI^H
//   + beta sum_l q_l diag(h~_l h~_l^H) + beta diag(H~_SI S H~_SI^H) + sigma^2 X^u
// with S = sum_j W_j W_j^H. Kept in factored form: S has rank J, so the SI
// part is formed through H~_SI W.
template <typename Real>
struct UlCovarianceParts {
    CMatrix<Real> users; // columns sqrt(q_l) h~_l
    CMatrix<Real> si;    // H~_SI W
    CMatrix<Real> si_distortion; // H~_SI sqrt(kappa diag S)
    RVector<Real> diag;  // receive distortion and noise
    Real kappa = 0;

    UlCovarianceParts(const BasicChannelRealization<Real>& ch, const EffectiveChannels<Real>& eff,
                      const RVector<Real>& x_ul)
        : kappa(ch.tx_distortion)
    {
        users = eff.h_ul * ch.q_ul.cwiseSqrt().template cast<Complex<Real>>().asDiagonal();
        si = eff.h_si * ch.w_dl;
        const RVector<Real> s_diag = ch.w_dl.cwiseAbs2().rowwise().sum();
        si_distortion = eff.h_si * (kappa * s_diag).cwiseSqrt().template cast<Complex<Real>>().asDiagonal();
        diag = ch.rx_distortion * (users.cwiseAbs2().rowwise().sum() + si.cwiseAbs2().rowwise().sum()) +
               ch.noise_var_bs * x_ul;
    }

    CMatrix<Real> assemble() const
    {
        CMatrix<Real> c = (Real(1) + kappa) * (users * users.adjoint());
        c.noalias() += si * si.adjoint();
        c.noalias() += si_distortion * si_distortion.adjoint();
        c.diagonal() += diag.template cast<Complex<Real>>();
        return c;
    }

    // r^H Psi_i^u r as a sum of nonnegative pieces; forming r^H C r and
    // subtracting the own-signal power cancels badly at high SNR.
    template <typename Vec>
    Real interference(const Vec& r, Eigen::Index i) const
    {
        const RVector<Real> v = (users.adjoint() * r).cwiseAbs2();
        Real others = 0;
        for (Eigen::Index l = 0; l < v.size(); ++l)
            if (l != i)
                others += v(l);
        return others + kappa * v.sum() + (si.adjoint() * r).squaredNorm() +
               (si_distortion.adjoint() * r).squaredNorm() + diag.dot(r.cwiseAbs2());
    }
};

template <typename Real>
CMatrix<Real> ul_received_covariance(const BasicChannelRealization<Real>& ch, const EffectiveChannels<Real>& eff,
                                     const RVector<Real>& x_ul)
{
    return UlCovarianceParts<Real>(ch, eff, x_ul).assemble();
}

// Psi_i^u: other UL users, kappa-scaled UL transmit distortion, SI with the
// DL transmit distortion, beta-scaled receive distortion of the UL and SI
// parts, and masked noise.
template <typename Real>
CMatrix<Real> interference_cov_ul(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                                  Eigen::Index i)
{
    require(i >= 0 && i < ch.num_ul(), "UL user index out of range");
    const auto eff = effective_channels(ch, x);
    CMatrix<Real> psi = ul_received_covariance(ch, eff, x.ul());
    psi -= ch.q_ul(i) * eff.h_ul.col(i) * eff.h_ul.col(i).adjoint();
    return psi;
}

namespace detail {

// |h~_m^H W_m|^2 for every DL user m.
template <typename Real>
RVector<Real> dl_own_gains(const BasicChannelRealization<Real>& ch, const EffectiveChannels<Real>& eff)
{
    const auto J = ch.num_dl();
    RVector<Real> g(J);
    for (Eigen::Index m = 0; m < J; ++m)
        g(m) = std::norm(eff.h_dl.col(m).dot(ch.w_dl.col(m)));
    return g;
}

// h~_m^H diag(W_m W_m^H) h~_m for every DL user m.
template <typename Real>
RVector<Real> dl_distortion_gains(const BasicChannelRealization<Real>& ch, const EffectiveChannels<Real>& eff)
{
    return (eff.h_dl.cwiseAbs2().cwiseProduct(ch.w_dl.cwiseAbs2())).colwise().sum().transpose();
}

template <typename Real>
Real dl_interference(const BasicChannelRealization<Real>& ch, const RVector<Real>& own, const RVector<Real>& dist,
                     Eigen::Index j)
{
    const Real kappa = ch.tx_distortion;
    const Real beta = ch.rx_distortion;
    const Real total = own.sum();
    Real others = 0;
    for (Eigen::Index m = 0; m < own.size(); ++m)
        if (m != j)
            others += own(m);
    Real ue = 0;
    for (Eigen::Index i = 0; i < ch.num_ul(); ++i)
        ue += std::norm(ch.g_ue(i, j)) * ch.q_ul(i);
    return others + kappa * dist.sum() + ue * (kappa + beta + Real(1)) + beta * total + ch.noise_var_ue;
}

} // namespace detail

// Psi_j^d. The multi-user and distortion sums pair each effective DL
// channel h~_m with its own beamformer W_m, which is the pairing the
// quadratic decomposition of the DL MSE relies on.
template <typename Real>
Real interference_var_dl(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                         Eigen::Index j)
{
    require(j >= 0 && j < ch.num_dl(), "DL user index out of range");
    const auto eff = effective_channels(ch, x);
    return detail::dl_interference(ch, detail::dl_own_gains(ch, eff), detail::dl_distortion_gains(ch, eff), j);
}

// Indices of antennas taking part in UL reception.
template <typename Real>
std::vector<Eigen::Index> active_ul_antennas(const RVector<Real>& x_ul)
{
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < x_ul.size(); ++k)
        if (x_ul(k) > Real(kActiveThreshold))
            idx.push_back(k);
    return idx;
}

// MMSE receivers. The UL inverse is restricted to the active antennas and
// embedded back with zero rows; no active antenna means all-zero UL filters.
namespace detail {

template <typename Real>
BasicReceiveFilters<Real> mmse_filters(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                                       const EffectiveChannels<Real>& eff, const CMatrix<Real>& c)
{
    const auto I = ch.num_ul();
    const auto J = ch.num_dl();

    BasicReceiveFilters<Real> f;
    f.r_ul = CMatrix<Real>::Zero(ch.num_antennas(), I);
    f.r_dl = CVector<Real>::Zero(J);

    const auto active = active_ul_antennas(x.ul());
    if (!active.empty() && I > 0) {
        const auto n = static_cast<Eigen::Index>(active.size());
        CMatrix<Real> c_sub(n, n);
        CMatrix<Real> h_sub(n, I);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b)
                c_sub(a, b) = c(active[a], active[b]);
            h_sub.row(a) = eff.h_ul.row(active[a]);
        }
        const CMatrix<Real> sol = c_sub.ldlt().solve(h_sub);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index i = 0; i < I; ++i)
                f.r_ul(active[a], i) = std::sqrt(ch.q_ul(i)) * sol(a, i);
    }

    const RVector<Real> own = dl_own_gains(ch, eff);
    const RVector<Real> dist = dl_distortion_gains(ch, eff);
    for (Eigen::Index j = 0; j < J; ++j) {
        const Complex<Real> a = eff.h_dl.col(j).dot(ch.w_dl.col(j)); // h~_j^H W_j
        f.r_dl(j) = a / (std::norm(a) + dl_interference(ch, own, dist, j));
    }
    return f;
}

} // namespace detail

// MMSE receivers. The UL inverse is restricted to the active antennas and
// embedded back with zero rows; no active antenna means all-zero UL filters.
template <typename Real>
BasicReceiveFilters<Real> mmse_filters(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x)
{
    detail::check_shapes(ch, x);
    const auto eff = effective_channels(ch, x);
    if (active_ul_antennas(x.ul()).empty() || ch.num_ul() == 0)
        return detail::mmse_filters(ch, x, eff, CMatrix<Real>());
    return detail::mmse_filters(ch, x, eff, ul_received_covariance(ch, eff, x.ul()));
}

// E_i^u = |sqrt(q_i) R_i^H h~_i - 1|^2 + R_i^H Psi_i^u R_i for arbitrary filters.
template <typename Real>
Real user_mse_ul(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                 const BasicReceiveFilters<Real>& filters, Eigen::Index i)
{
    require(i >= 0 && i < ch.num_ul(), "UL user index out of range");
    const auto eff = effective_channels(ch, x);
    const auto r = filters.r_ul.col(i);
    const Complex<Real> gain = std::sqrt(ch.q_ul(i)) * r.dot(eff.h_ul.col(i));
    return std::norm(gain - Real(1)) + UlCovarianceParts<Real>(ch, eff, x.ul()).interference(r, i);
}

// E_j^d = |r_j^* h~_j^H W_j - 1|^2 + |r_j|^2 Psi_j^d.
template <typename Real>
Real user_mse_dl(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                 const BasicReceiveFilters<Real>& filters, Eigen::Index j)
{
    const auto eff = effective_channels(ch, x);
    const Complex<Real> a = eff.h_dl.col(j).dot(ch.w_dl.col(j));
    const Complex<Real> r = filters.r_dl(j);
    return std::norm(std::conj(r) * a - Real(1)) + std::norm(r) * interference_var_dl(ch, x, j);
}

// sum_k log2(1 / MSE_k). Throws ContractViolation if any MSE is outside (0, 1].
template <typename Real>
Real sum_spectral_efficiency(const BasicMseReport<Real>& report)
{
    Real se = 0;
    auto add = [&se](const RVector<Real>& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            require(v(k) > Real(0) && v(k) <= Real(1), "spectral efficiency needs every MSE in (0, 1]");
            se -= std::log2(v(k));
        }
    };
    add(report.mse_ul);
    add(report.mse_dl);
    return se;
}

namespace detail {

template <typename Real>
BasicMseReport<Real> evaluate_mse(const BasicChannelRealization<Real>& ch, const BasicReceiveFilters<Real>& filters,
                                  const EffectiveChannels<Real>& eff, const UlCovarianceParts<Real>& parts)
{
    const auto I = ch.num_ul();
    const auto J = ch.num_dl();

    BasicMseReport<Real> rep;
    rep.mse_ul.resize(I);
    rep.mse_dl.resize(J);

    for (Eigen::Index i = 0; i < I; ++i) {
        const auto r = filters.r_ul.col(i);
        const Complex<Real> gain = std::sqrt(ch.q_ul(i)) * r.dot(eff.h_ul.col(i));
        rep.mse_ul(i) = std::norm(gain - Real(1)) + parts.interference(r, i);
    }

    const RVector<Real> own = dl_own_gains(ch, eff);
    const RVector<Real> dist = dl_distortion_gains(ch, eff);
    for (Eigen::Index j = 0; j < J; ++j) {
        const Complex<Real> a = eff.h_dl.col(j).dot(ch.w_dl.col(j));
        const Complex<Real> r = filters.r_dl(j);
        rep.mse_dl(j) = std::norm(std::conj(r) * a - Real(1)) + std::norm(r) * dl_interference(ch, own, dist, j);
    }

    rep.sum_mse = rep.mse_ul.sum() + rep.mse_dl.sum();
    const bool in_range = ((rep.mse_ul.array() > Real(0)) && (rep.mse_ul.array() <= Real(1))).all() &&
                          ((rep.mse_dl.array() > Real(0)) && (rep.mse_dl.array() <= Real(1))).all();
    rep.sum_se = in_range ? sum_spectral_efficiency(rep) : std::numeric_limits<Real>::quiet_NaN();
    return rep;
}

} // namespace detail

// Per-user and total MSE for the given filters; one covariance build
// shared by all UL users.
template <typename Real>
BasicMseReport<Real> evaluate_mse(const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x,
                                  const BasicReceiveFilters<Real>& filters)
{
    detail::check_shapes(ch, x);
    const auto eff = effective_channels(ch, x);
    return detail::evaluate_mse(ch, filters, eff, UlCovarianceParts<Real>(ch, eff, x.ul()));
}

// Filters and their MSE report from a single covariance build.
template <typename Real>
std::pair<BasicReceiveFilters<Real>, BasicMseReport<Real>> mmse_filters_and_report(
    const BasicChannelRealization<Real>& ch, const BasicAntennaAssignment<Real>& x)
{
    detail::check_shapes(ch, x);
    const auto eff = effective_channels(ch, x);
    const UlCovarianceParts<Real> parts(ch, eff, x.ul());
    auto f = detail::mmse_filters(ch, x, eff, parts.assemble());
    auto rep = detail::evaluate_mse(ch, f, eff, parts);
    return {std::move(f), std::move(rep)};
}

// MSE report under freshly computed MMSE filters.
template <typename Real>
BasicMseReport<Real> evaluate_assignment(const BasicChannelRealization<Real>& ch,
                                         const BasicAntennaAssignment<Real>& x)
{
    return mmse_filters_and_report(ch, x).second;
}

} // namespace fdsplit

#endif
