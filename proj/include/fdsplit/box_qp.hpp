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

#ifndef FDSPLIT_BOX_QP_HPP
#define FDSPLIT_BOX_QP_HPP

#include "fdsplit/decomposition.hpp"
#include "fdsplit/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace fdsplit {

template <typename Real>
struct BoxQpResult {
    RVector<Real> x;
    Real kkt_residual = 0; // ||x - P(x - grad)||_2
    int iterations = 0;
};

struct BoxQpOptions {
    double tolerance = 1e-9;
    int max_iterations = 500;
};

namespace detail {

template <typename Real>
RVector<Real> project_unit_box(const RVector<Real>& v)
{
    return v.cwiseMax(Real(0)).cwiseMin(Real(1));
}

} // namespace detail

// Minimizes  x^T Q x - 2 b^T x + (alpha/2) ||x - x_prev||^2  over [0,1]^M
// for symmetric PSD Q. Equivalent to  0.5 x^T H x - c^T x  with
// H = 2Q + alpha I and c = 2b + alpha x_prev, which is strongly convex.
//
// Projected Newton on the free set with an Armijo search along the
// projection arc; a projected-gradient step with step 1/L
// (L = 2 lambda_max(Q) + alpha) is taken whenever Newton fails to descend.
template <typename Real>
BoxQpResult<Real> solve_box_qp(const RMatrix<Real>& q, const RVector<Real>& b, const RVector<Real>& x_prev,
                               Real alpha, const BoxQpOptions& opts = {})
{
    const auto M = q.rows();
    require(q.cols() == M && b.size() == M && x_prev.size() == M, "box QP dimension mismatch");
    require(q.allFinite() && b.allFinite() && x_prev.allFinite() && std::isfinite(static_cast<double>(alpha)),
            "box QP inputs must be finite");
    require(alpha > Real(0), "box QP needs alpha > 0");

    RMatrix<Real> h = Real(2) * q;
    h.diagonal().array() += alpha;
    const RVector<Real> c = Real(2) * b + alpha * x_prev;
    auto objective = [&](const RVector<Real>& x) { return Real(0.5) * x.dot(h * x) - c.dot(x); };

    Real lipschitz = alpha;
    if (M > 0) {
        Eigen::SelfAdjointEigenSolver<RMatrix<Real>> eig(h, Eigen::EigenvaluesOnly);
        lipschitz = std::max(alpha, eig.eigenvalues().maxCoeff());
    }

    BoxQpResult<Real> res;
    RVector<Real> x = detail::project_unit_box<Real>(x_prev);
    for (int it = 0;; ++it) {
        const RVector<Real> g = h * x - c;
        res.kkt_residual = (x - detail::project_unit_box<Real>(x - g)).norm();
        res.iterations = it;
        if (res.kkt_residual <= Real(opts.tolerance) || it >= opts.max_iterations)
            break;

        std::vector<Eigen::Index> free;
        for (Eigen::Index k = 0; k < M; ++k) {
            const bool at_lo = x(k) <= Real(0) && g(k) > Real(0);
            const bool at_hi = x(k) >= Real(1) && g(k) < Real(0);
            if (!at_lo && !at_hi)
                free.push_back(k);
        }

        bool moved = false;
        if (!free.empty()) {
            const auto n = static_cast<Eigen::Index>(free.size());
            RMatrix<Real> hff(n, n);
            RVector<Real> gf(n);
            for (Eigen::Index a = 0; a < n; ++a) {
                gf(a) = g(free[a]);
                for (Eigen::Index bb = 0; bb < n; ++bb)
                    hff(a, bb) = h(free[a], free[bb]);
            }
            const RVector<Real> df = -hff.ldlt().solve(gf);
            RVector<Real> d = RVector<Real>::Zero(M);
            for (Eigen::Index a = 0; a < n; ++a)
                d(free[a]) = df(a);

            const Real f0 = objective(x);
            Real step = 1;
            for (int ls = 0; ls < 40; ++ls, step /= Real(2)) {
                const RVector<Real> xt = detail::project_unit_box<Real>(x + step * d);
                const Real predicted = g.dot(xt - x);
                if (predicted < Real(0) && objective(xt) <= f0 + Real(1e-4) * predicted) {
                    x = xt;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved)
            x = detail::project_unit_box<Real>(x - g / lipschitz);
    }
    res.x = x;
    return res;
}

template <typename Real>
BoxQpResult<Real> solve_box_qp(const BasicLinearizedObjective<Real>& obj, const RVector<Real>& x_prev, Real alpha,
                               const BoxQpOptions& opts = {})
{
    return solve_box_qp<Real>(obj.quadratic(), obj.b_vec, x_prev, alpha, opts);
}

} // namespace fdsplit

#endif
