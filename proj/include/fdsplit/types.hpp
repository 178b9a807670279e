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

#ifndef FDSPLIT_TYPES_HPP
#define FDSPLIT_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace fdsplit {

// Dense types are parameterized on the real scalar; complex quantities use
// std::complex<Real>. The library is instantiated with double everywhere
// outside the tests.
template <typename Real> using Complex = std::complex<Real>;
template <typename Real> using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real> using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <typename Real> using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real> using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using CMatrixd = CMatrix<double>;
using CVectord = CVector<double>;
using RMatrixd = RMatrix<double>;
using RVectord = RVector<double>;

// Thrown when a caller breaks a documented precondition (dimension mismatch,
// out-of-range assignment entries, non-finite inputs).
class ContractViolation : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw ContractViolation(what);
}

} // namespace fdsplit

#endif
