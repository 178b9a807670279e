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

#ifndef FDSPLIT_RNG_HPP
#define FDSPLIT_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fdsplit {

// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// A seeded random stream. Substreams are a pure function of
// (seed, key path), so Monte Carlo realizations and solver restarts can be
// generated in any order and still reproduce bit-identical draws.
class RandomStream {
 public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    RandomStream substream(std::uint64_t key) const { return RandomStream(mix64(seed_ ^ mix64(key + 0x5851f42d4c957f2dULL))); }

    RandomStream substream(std::initializer_list<std::uint64_t> path) const
    {
        RandomStream s = *this;
        for (auto k : path)
            s = s.substream(k);
        return s;
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    // Circular complex Gaussian with unit total variance.
    std::complex<double> complex_normal()
    {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    std::mt19937_64& engine() { return engine_; }

 private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace fdsplit

#endif
