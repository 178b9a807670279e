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

#ifndef FDSPLIT_BASELINES_HPP
#define FDSPLIT_BASELINES_HPP

#include "fdsplit/mse.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdsplit {

class CapacityError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxExhaustiveAntennas = 20;

enum class Baseline { Exh, Split };

template <typename Real>
struct BasicBaselineResult {
    Baseline method = Baseline::Exh;
    RVector<Real> x_binary;
    Real sum_mse = 0;
    Real sum_se = 0;
    std::uint64_t evaluations = 0;
};

using BaselineResult = BasicBaselineResult<double>;

struct ExhaustiveOptions {
    bool exclude_degenerate = false; // skip all-UL and all-DL
};

// Minimum sum MSE over every binary assignment, each scored with its own
// MMSE filters. Assignment k (bit m = antenna m is UL) is visited in
// increasing k, so ties resolve to the lowest encoding.
template <typename Real>
BasicBaselineResult<Real> exhaustive(const BasicChannelRealization<Real>& ch, const ExhaustiveOptions& opts = {})
{
    const auto M = ch.num_antennas();
    if (M > kMaxExhaustiveAntennas)
        throw CapacityError("exhaustive search supports at most " + std::to_string(kMaxExhaustiveAntennas) +
                            " antennas, got " + std::to_string(M));
    require(M >= 1, "exhaustive search needs at least one antenna");

    const std::uint64_t count = std::uint64_t{1} << M;
    const std::uint64_t all_ul = count - 1;

    BasicBaselineResult<Real> best;
    best.method = Baseline::Exh;
    best.sum_mse = std::numeric_limits<Real>::infinity();
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        if (opts.exclude_degenerate && (bits == 0 || bits == all_ul))
            continue;
        const auto x = BasicAntennaAssignment<Real>::from_bits(bits, M);
        const auto rep = evaluate_assignment(ch, x);
        ++best.evaluations;
        if (rep.sum_mse < best.sum_mse) {
            best.sum_mse = rep.sum_mse;
            best.sum_se = rep.sum_se;
            best.x_binary = x.ul();
        }
    }
    return best;
}

// First ceil(M/2) antennas UL, the rest DL.
template <typename Real = double>
RVector<Real> equal_split(Eigen::Index num_antennas)
{
    RVector<Real> x = RVector<Real>::Zero(num_antennas);
    x.head((num_antennas + 1) / 2).setOnes();
    return x;
}

template <typename Real>
BasicBaselineResult<Real> split_baseline(const BasicChannelRealization<Real>& ch)
{
    BasicBaselineResult<Real> r;
    r.method = Baseline::Split;
    r.x_binary = equal_split<Real>(ch.num_antennas());
    const auto rep = evaluate_assignment(ch, BasicAntennaAssignment<Real>(r.x_binary));
    r.sum_mse = rep.sum_mse;
    r.sum_se = rep.sum_se;
    r.evaluations = 1;
    return r;
}

} // namespace fdsplit

#endif
