// SPDX-License-Identifier: Apache-2.0
//
// lsmimo: large-system analysis and precoder design for MIMO systems
// with MMSE receivers
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

#ifndef LSMIMO_RNG_HPP
#define LSMIMO_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace lsmimo {

/// Seeded random stream addressed by a (seed, stream) pair of 64-bit values.
///
/// Streams with distinct indices are statistically independent for Monte
/// Carlo purposes, so one stream per realization index makes parallel runs
/// reproduce serial runs exactly. The sequence emitted by a given
/// (seed, stream) pair never depends on how many other streams exist.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32),
        };
        engine_.seed(seq);
    }

    double standard_normal() { return normal_(engine_); }

    /// CN(0,1): real and imaginary parts independent N(0, 1/2).
    std::complex<double> circular_gaussian() {
        const double re = standard_normal();
        const double im = standard_normal();
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        return {re * inv_sqrt2, im * inv_sqrt2};
    }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace lsmimo

#endif  // LSMIMO_RNG_HPP
