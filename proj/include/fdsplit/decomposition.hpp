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

#ifndef FDSPLIT_DECOMPOSITION_HPP
#define FDSPLIT_DECOMPOSITION_HPP

// For fixed receive filters the sum MSE splits into
//
//   sumMSE(x) = f_u(x) + f_d(1 - x) + f_ud(x) + const
//
// where f_u and f_d are quadratic forms of the UL and DL assignment vectors
// and f_ud is the SI coupling, quadratic in each of X^u and X^d separately:
//
//   f_u(x)  = x^T Lu x - 2 Au^T x
//   f_d(y)  = y^T Ld y - 2 Ad^T y
//   f_ud(x) = Tr{X S Y Sd Y S^H X diag(beta Ru)} + Tr{X S Y Wd Y S^H X Ru}
//
// with X = diag(x), Y = I - X, S = H_SI, Sd = sum_j W_j W_j^H,
// Wd = Sd + kappa diag(Sd), Ru = sum_i R_i R_i^H.

#include "fdsplit/mse.hpp"
#include "fdsplit/rng.hpp"
#include "fdsplit/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fdsplit {

template <typename Real>
struct BasicDecompositionTerms {
    CMatrix<Real> lambda_ul; // Lu = sum_i diag(R_i^*) Gamma diag(R_i)
    CMatrix<Real> lambda_dl; // Ld = sum_j diag(W_j^*) Theta_j diag(W_j)
    RVector<Real> a_ul;
    RVector<Real> a_dl;
    CMatrix<Real> sigma_dl; // Sd
    CMatrix<Real> w_mat;    // Wd
    CMatrix<Real> r_mat;    // Ru = sum_i R_i R_i^H
    CMatrix<Real> r_ul;     // the UL filters themselves
};

using DecompositionTerms = BasicDecompositionTerms<double>;

template <typename Real>
struct BasicLinearizedObjective {
    CMatrix<Real> lambda_total; // Lu + Ld, explicitly Hermitian
    RVector<Real> b_vec;
    RVector<Real> anchor;
    Real symmetrization_residual = 0; // ||L - L^H||_F / (2 ||L||_F) before symmetrization

    // Real symmetric matrix Q with x^T Q x = x^T L x for real x.
    RMatrix<Real> quadratic() const { return lambda_total.real(); }

    Real value(const RVector<Real>& x) const { return x.dot(quadratic() * x) - Real(2) * b_vec.dot(x); }
};

using LinearizedObjective = BasicLinearizedObjective<double>;

namespace detail {

template <typename Real>
CMatrix<Real> as_cdiag(const RVector<Real>& v)
{
    return v.template cast<Complex<Real>>().asDiagonal();
}

// Gamma = sum_l q_l { (kappa+1) H_l H_l^H + beta diag(H_l H_l^H) }
template <typename Real>
CMatrix<Real> gamma_ul(const BasicChannelRealization<Real>& ch)
{
    const CMatrix<Real> scaled = ch.h_ul * ch.q_ul.cwiseSqrt().template cast<Complex<Real>>().asDiagonal();
    const CMatrix<Real> users = scaled * scaled.adjoint();
    CMatrix<Real> g = (Real(1) + ch.tx_distortion) * users;
    g.diagonal() += ch.rx_distortion * users.diagonal();
    return g;
}

// r^d = sum_m |r_m|^2
template <typename Real>
Real dl_filter_energy(const BasicReceiveFilters<Real>& f)
{
    return f.r_dl.squaredNorm();
}

// Theta_j = r^d { (beta+1) H_j H_j^H + kappa diag(H_j H_j^H) }
template <typename Real>
CMatrix<Real> theta_dl(const BasicChannelRealization<Real>& ch, Real rd, Eigen::Index j)
{
    const CMatrix<Real> hh = ch.h_dl.col(j) * ch.h_dl.col(j).adjoint();
    CMatrix<Real> t = (Real(1) + ch.rx_distortion) * hh;
    t.diagonal() += ch.tx_distortion * hh.diagonal();
    return rd * t;
}

} // namespace detail

template <typename Real>
BasicDecompositionTerms<Real> build_quadratic_terms(const BasicChannelRealization<Real>& ch,
                                                    const BasicReceiveFilters<Real>& filters)
{
    const auto M = ch.num_antennas();
    const auto I = ch.num_ul();
    const auto J = ch.num_dl();
    require(filters.r_ul.rows() == M && filters.r_ul.cols() == I, "UL filters must be M x I");
    require(filters.r_dl.size() == J, "DL filters must have J entries");

    BasicDecompositionTerms<Real> t;
    t.r_mat = filters.r_ul * filters.r_ul.adjoint();
    t.r_ul = filters.r_ul;

    // sum_i diag(R_i^*) G diag(R_i) = G .* conj(sum_i R_i R_i^H)
    t.lambda_ul = detail::gamma_ul(ch).cwiseProduct(t.r_mat.conjugate());
    t.a_ul = RVector<Real>::Zero(M);
    for (Eigen::Index i = 0; i < I; ++i) {
        const auto r = filters.r_ul.col(i);
        const RVector<Real> cross = (r.conjugate().cwiseProduct(ch.h_ul.col(i))).real();
        t.a_ul += std::sqrt(ch.q_ul(i)) * cross - (ch.noise_var_bs / Real(2)) * r.cwiseAbs2();
    }

    // Theta_j is rank one plus diagonal, so diag(W_j^*) Theta_j diag(W_j)
    // is (H_j .* W_j^*)(H_j .* W_j^*)^H plus a diagonal.
    const Real rd = detail::dl_filter_energy(filters);
    const CMatrix<Real> hw = ch.h_dl.cwiseProduct(ch.w_dl.conjugate());
    t.lambda_dl = (rd * (Real(1) + ch.rx_distortion)) * (hw * hw.adjoint());
    t.lambda_dl.diagonal() += (rd * ch.tx_distortion * hw.cwiseAbs2().rowwise().sum()).template cast<Complex<Real>>();
    // Re{ r_j^* H_jk^* W_jk }
    t.a_dl = (ch.h_dl.conjugate().cwiseProduct(ch.w_dl) * filters.r_dl.conjugate()).real();

    t.sigma_dl = ch.w_dl * ch.w_dl.adjoint();
    t.w_mat = t.sigma_dl;
    t.w_mat.diagonal() += ch.tx_distortion * t.sigma_dl.diagonal();
    return t;
}

template <typename Real>
Real f_ul_value(const RVector<Real>& x_ul, const BasicDecompositionTerms<Real>& t)
{
    const CVector<Real> xc = x_ul.template cast<Complex<Real>>();
    return std::real(xc.dot(t.lambda_ul * xc)) - Real(2) * t.a_ul.dot(x_ul);
}

template <typename Real>
Real f_dl_value(const RVector<Real>& x_dl, const BasicDecompositionTerms<Real>& t)
{
    const CVector<Real> xc = x_dl.template cast<Complex<Real>>();
    return std::real(xc.dot(t.lambda_dl * xc)) - Real(2) * t.a_dl.dot(x_dl);
}

// f_u evaluated directly with diagonal assignment matrices:
// sum_i R_i^H X Gamma X R_i + sigma^2 R_i^H X R_i - 2 sqrt(q_i) Re{R_i^H X H_i}
template <typename Real>
Real f_ul_matrix_form(const RVector<Real>& x_ul, const BasicChannelRealization<Real>& ch,
                      const BasicReceiveFilters<Real>& filters)
{
    const CMatrix<Real> x = detail::as_cdiag(x_ul);
    const CMatrix<Real> gamma = detail::gamma_ul(ch);
    Real f = 0;
    for (Eigen::Index i = 0; i < ch.num_ul(); ++i) {
        const auto r = filters.r_ul.col(i);
        f += std::real(r.dot(x * gamma * x * r)) + ch.noise_var_bs * std::real(r.dot(x * r)) -
             Real(2) * std::sqrt(ch.q_ul(i)) * std::real(r.dot(x * ch.h_ul.col(i)));
    }
    return f;
}

// f_d directly: sum_j W_j^H Y Theta_j Y W_j - 2 Re{r_j^* H_j^H Y W_j}
template <typename Real>
Real f_dl_matrix_form(const RVector<Real>& x_dl, const BasicChannelRealization<Real>& ch,
                      const BasicReceiveFilters<Real>& filters)
{
    const CMatrix<Real> y = detail::as_cdiag(x_dl);
    const Real rd = detail::dl_filter_energy(filters);
    Real f = 0;
    for (Eigen::Index j = 0; j < ch.num_dl(); ++j) {
        const auto w = ch.w_dl.col(j);
        f += std::real(w.dot(y * detail::theta_dl(ch, rd, j) * y * w)) -
             Real(2) * std::real(std::conj(filters.r_dl(j)) * ch.h_dl.col(j).dot(y * w));
    }
    return f;
}

// SI coupling at X^u = diag(x), X^d = I - X^u.
template <typename Real>
Real f_ud_value(const BasicAntennaAssignment<Real>& x, const BasicDecompositionTerms<Real>& t,
                const BasicChannelRealization<Real>& ch)
{
    const CMatrix<Real> xu = detail::as_cdiag(x.ul());
    const CMatrix<Real> xd = detail::as_cdiag(x.dl());
    const CMatrix<Real> si = xu * ch.h_si * xd; // X S Y
    const CMatrix<Real> d_beta = (ch.rx_distortion * t.r_mat.diagonal()).asDiagonal();
    const Complex<Real> first = (si * t.sigma_dl * si.adjoint() * d_beta).trace();
    const Complex<Real> second = (si * t.w_mat * si.adjoint() * t.r_mat).trace();
    return std::real(first + second);
}

// Gradient of f_ud with respect to the diagonal matrix X^u, with X^d = I - X^u
// substituted. The diagonal holds d f_ud / d x_k; see grad_f_ud_diag.
template <typename Real>
CMatrix<Real> grad_f_ud(const BasicAntennaAssignment<Real>& x, const BasicDecompositionTerms<Real>& t,
                        const BasicChannelRealization<Real>& ch)
{
    const CMatrix<Real> X = detail::as_cdiag(x.ul());
    const CMatrix<Real> Y = detail::as_cdiag(x.dl());
    const CMatrix<Real> S = ch.h_si;
    const CMatrix<Real> Sc = S.conjugate();
    const CMatrix<Real> St = S.transpose();
    const CMatrix<Real> Rt = t.r_mat.transpose();
    const CMatrix<Real> Wt = t.w_mat.transpose();
    const CMatrix<Real> Sdt = t.sigma_dl.transpose();
    const CMatrix<Real> D = (ch.rx_distortion * t.r_mat.diagonal()).asDiagonal();

    const CMatrix<Real> pos = Rt * X * Sc * Y * Wt * Y * St                        //
                              + Sc * Y * Wt * Y * St * X * Rt                      //
                              + D * X * Sc * Y * Sdt * Y * St                      //
                              + Sc * Y * Sdt * Y * St * X * D;                     //
    const CMatrix<Real> neg = St * X * Rt * X * Sc * Y * Wt                        //
                              + Wt * Y * St * X * Rt * X * Sc                      //
                              + St * X * D * X * Sc * Y * Sdt                      //
                              + Sdt * Y * St * X * D * X * Sc;                     //
    return pos - neg;
}

// Same diagonal without M x M x M products: the DL covariance has rank J
// and R R^H has rank I, so every term collapses to M x I or M x J factors.
template <typename Real>
RVector<Real> grad_f_ud_diag(const BasicAntennaAssignment<Real>& x, const BasicDecompositionTerms<Real>& t,
                             const BasicChannelRealization<Real>& ch)
{
    using CM = CMatrix<Real>;
    const RVector<Real> xv = x.ul();
    const RVector<Real> yv = x.dl();
    const CM& S = ch.h_si;
    const CM& R = t.r_ul;
    const CM& Wd = ch.w_dl;
    const Real kappa = ch.tx_distortion;
    const RVector<Real> sig = Wd.cwiseAbs2().rowwise().sum();
    const RVector<Real> dv = ch.rx_distortion * R.cwiseAbs2().rowwise().sum();
    const RVector<Real> xdx = xv.cwiseProduct(dv).cwiseProduct(xv);

    // sum over columns of a .* b, real part
    auto row_dot = [](const CM& a, const CM& b) -> RVector<Real> {
        return a.cwiseProduct(b).rowwise().sum().real();
    };

    const CM U = S * yv.template cast<Complex<Real>>().asDiagonal(); // S Y
    const CM XR = xv.template cast<Complex<Real>>().asDiagonal() * R;
    const CM UWd = U * Wd;

    const CM P = XR.adjoint() * U; // R^H X S Y
    const CM PW = (P * Wd) * Wd.adjoint() + kappa * P * sig.template cast<Complex<Real>>().asDiagonal();
    const CM Q = PW * U.adjoint();
    const CM V = U.adjoint() * XR;
    const CM WV = Wd * (Wd.adjoint() * V) + kappa * sig.template cast<Complex<Real>>().asDiagonal() * V;
    const CM UWV = U * WV;

    RVector<Real> g = row_dot(R, Q.transpose()) + row_dot(UWV, R.conjugate());
    g += Real(2) * dv.cwiseProduct(xv).cwiseProduct(UWd.cwiseAbs2().rowwise().sum());
    g -= row_dot(S.adjoint() * XR, PW.transpose());
    g -= row_dot(WV, (XR.adjoint() * S).transpose());
    const CM T = S.adjoint() * (xdx.template cast<Complex<Real>>().asDiagonal() * UWd);
    g -= row_dot(T, Wd.conjugate());
    const CM Z = UWd.adjoint() * xdx.template cast<Complex<Real>>().asDiagonal() * S;
    g -= row_dot(Wd, Z.transpose());
    return g;
}

// f_u(x) + f_d(1 - x) + f_ud(x); equals the sum MSE under the same filters
// up to decomposition_constant().
template <typename Real>
Real decomposed_objective(const BasicAntennaAssignment<Real>& x, const BasicDecompositionTerms<Real>& t,
                          const BasicChannelRealization<Real>& ch)
{
    return f_ul_value(x.ul(), t) + f_dl_value(x.dl(), t) + f_ud_value(x, t, ch);
}

// The assignment-independent remainder: one per UL user, one per DL user,
// and the DL filters' UE-to-UE interference and noise.
template <typename Real>
Real decomposition_constant(const BasicChannelRealization<Real>& ch, const BasicReceiveFilters<Real>& filters)
{
    const Real scale = ch.tx_distortion + ch.rx_distortion + Real(1);
    Real c = static_cast<Real>(ch.num_ul() + ch.num_dl());
    for (Eigen::Index j = 0; j < ch.num_dl(); ++j) {
        Real ue = 0;
        for (Eigen::Index i = 0; i < ch.num_ul(); ++i)
            ue += std::norm(ch.g_ue(i, j)) * ch.q_ul(i);
        c += std::norm(filters.r_dl(j)) * (ue * scale + ch.noise_var_ue);
    }
    return c;
}

// Quadratic model x^T L x - 2 B^T x of f_u + f_d + (first-order f_ud around
// the anchor), constant dropped.
template <typename Real>
BasicLinearizedObjective<Real> build_linearized(const BasicAntennaAssignment<Real>& anchor,
                                                const BasicDecompositionTerms<Real>& t,
                                                const BasicChannelRealization<Real>& ch)
{
    BasicLinearizedObjective<Real> obj;
    const CMatrix<Real> lambda = t.lambda_ul + t.lambda_dl;
    const Real norm = lambda.norm();
    obj.symmetrization_residual = norm > Real(0) ? (lambda - lambda.adjoint()).norm() / (Real(2) * norm) : Real(0);
    obj.lambda_total = (lambda + lambda.adjoint()) / Real(2);

    const auto M = ch.num_antennas();
    const CVector<Real> ones = CVector<Real>::Ones(M);
    obj.b_vec = t.a_ul + (t.lambda_dl * ones).real() - t.a_dl - grad_f_ud_diag(anchor, t, ch) / Real(2);
    obj.anchor = anchor.ul();
    return obj;
}

// Trace/diag identities the decomposition is built on.
namespace identities {

// sum_i Tr{X^H A_i X} vs Tr{(sum_i A_i) X X^H}
template <typename Real>
std::pair<Complex<Real>, Complex<Real>> trace_cyclic_sum(const std::vector<CMatrix<Real>>& a, const CMatrix<Real>& x)
{
    Complex<Real> lhs = 0;
    CMatrix<Real> sum = CMatrix<Real>::Zero(x.rows(), x.rows());
    for (const auto& ai : a) {
        lhs += (x.adjoint() * ai * x).trace();
        sum += ai;
    }
    return {lhs, (sum * x * x.adjoint()).trace()};
}

// Tr{diag(x x^H) A} vs x^H diag(A) x
template <typename Real>
std::pair<Complex<Real>, Complex<Real>> diag_trace(const CVector<Real>& x, const CMatrix<Real>& a)
{
    const CMatrix<Real> xx = x * x.adjoint();
    const CMatrix<Real> dxx = xx.diagonal().asDiagonal();
    const CMatrix<Real> da = a.diagonal().asDiagonal();
    return {(dxx * a).trace(), x.dot(da * x)};
}

// y^H diag(x) A diag(x) z vs x^H (diag(y^*) A diag(z)) x, x real
template <typename Real>
std::pair<Complex<Real>, Complex<Real>> diag_sandwich(const RVector<Real>& x, const CVector<Real>& y,
                                                      const CMatrix<Real>& a, const CVector<Real>& z)
{
    const CVector<Real> xc = x.template cast<Complex<Real>>();
    const CMatrix<Real> dx = xc.asDiagonal();
    const Complex<Real> lhs = y.dot(dx * a * dx * z);
    const CMatrix<Real> inner = y.conjugate().asDiagonal() * a * z.asDiagonal();
    return {lhs, xc.dot(inner * xc)};
}

// Tr{diag(x^*) A diag(y) B^T} vs x^H (A .* B) y
template <typename Real>
std::pair<Complex<Real>, Complex<Real>> hadamard_trace(const CVector<Real>& x, const CMatrix<Real>& a,
                                                       const CVector<Real>& y, const CMatrix<Real>& b)
{
    const CMatrix<Real> dxc = x.conjugate().asDiagonal();
    const CMatrix<Real> dy = y.asDiagonal();
    const Complex<Real> lhs = (dxc * a * dy * b.transpose()).trace();
    return {lhs, x.dot(a.cwiseProduct(b) * y)};
}

} // namespace identities

struct IdentityCheck {
    int identity = 0;
    int instances = 0;
    double max_rel_error = 0;
    bool passed = false;
};

namespace detail {

inline CMatrixd random_cmatrix(Eigen::Index rows, Eigen::Index cols, RandomStream& rng)
{
    CMatrixd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = rng.complex_normal();
    return m;
}

inline double rel_error(std::complex<double> a, std::complex<double> b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace detail

// Evaluates all four identities on `instances` random complex cases each
// (sizes 1..8) and reports the worst relative error per identity.
inline std::array<IdentityCheck, 4> identity_suite(RandomStream rng, int instances = 100, double tol = 1e-10)
{
    std::array<IdentityCheck, 4> out{};
    for (int k = 0; k < 4; ++k) {
        out[k].identity = k + 1;
        out[k].instances = instances;
    }
    for (int n = 0; n < instances; ++n) {
        const auto m = static_cast<Eigen::Index>(1 + (n % 8));
        auto s = rng.substream(static_cast<std::uint64_t>(n));

        std::vector<CMatrixd> a;
        for (int i = 0; i < 3; ++i)
            a.push_back(detail::random_cmatrix(m, m, s));
        const CMatrixd xm = detail::random_cmatrix(m, 2, s);
        auto [l1, r1] = identities::trace_cyclic_sum<double>(a, xm);
        out[0].max_rel_error = std::max(out[0].max_rel_error, detail::rel_error(l1, r1));

        const CVectord x = detail::random_cmatrix(m, 1, s);
        auto [l2, r2] = identities::diag_trace<double>(x, a[0]);
        out[1].max_rel_error = std::max(out[1].max_rel_error, detail::rel_error(l2, r2));

        RVectord xr(m);
        for (Eigen::Index k = 0; k < m; ++k)
            xr(k) = s.uniform();
        const CVectord y = detail::random_cmatrix(m, 1, s);
        const CVectord z = detail::random_cmatrix(m, 1, s);
        auto [l3, r3] = identities::diag_sandwich<double>(xr, y, a[1], z);
        out[2].max_rel_error = std::max(out[2].max_rel_error, detail::rel_error(l3, r3));

        auto [l4, r4] = identities::hadamard_trace<double>(x, a[1], y, a[2]);
        out[3].max_rel_error = std::max(out[3].max_rel_error, detail::rel_error(l4, r4));
    }
    for (auto& c : out)
        c.passed = c.max_rel_error <= tol;
    return out;
}

} // namespace fdsplit

#endif
