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

#include <catch2/catch_amalgamated.hpp>

#include <lsmimo/channel.hpp>

using namespace lsmimo;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("zero angular spread collapses to rank one", "[channel]") {
    const CMatrix c = clustered_correlation({kPi / 2.0, 0.0, 4});
    for (Index k = 0; k < 4; ++k)
        for (Index l = 0; l < 4; ++l) REQUIRE(std::abs(c(k, l) - Complex(1.0, 0.0)) < 1e-10);
    const HermitianEig eig = herm_eig(c);
    REQUIRE(eig.eigenvalues(0) == Catch::Approx(4.0).margin(1e-10));
    for (Index j = 1; j < 4; ++j) REQUIRE(std::abs(eig.eigenvalues(j)) < 1e-10);
}

TEST_CASE("clustered correlation has unit diagonal and unit normalized trace", "[channel]") {
    const CMatrix c = clustered_correlation({0.7, 0.3, 6});
    for (Index k = 0; k < 6; ++k) REQUIRE(std::abs(c(k, k) - Complex(1.0, 0.0)) < 1e-15);
    REQUIRE(c.trace().real() / 6.0 == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("clustered correlation entries follow the formula", "[channel]") {
    const ClusterSpec spec{kPi / 4.0, 0.5, 4};
    const CMatrix c = clustered_correlation(spec);
    const double expected_mag =
        std::exp(-0.5 * std::pow(kPi * std::sin(kPi / 4.0) * 0.5, 2.0));
    REQUIRE(std::abs(c(0, 1)) == Catch::Approx(expected_mag).margin(1e-12));
    REQUIRE(expected_mag == Catch::Approx(0.5397).margin(1e-3));

    const HermitianEig eig = herm_eig(c);
    REQUIRE(eig.eigenvalues.minCoeff() > -1e-10);
    REQUIRE((c - c.adjoint()).norm() == 0.0);  // Hermitian by construction
}

TEST_CASE("channel samples have the i.i.d. second moment", "[channel]") {
    const ChannelModel model = make_iid_model(4, 4, 1.0);
    const int n = 100000 / 16;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        RngStream rng(77, static_cast<std::uint64_t>(i));
        acc += sample_channel(model, rng).squaredNorm();
    }
    const double mean_entry_power = acc / (n * 16.0);
    // each entry has variance 1/t = 0.25; 16 entries averaged per draw
    const double se = 0.25 / std::sqrt(static_cast<double>(n * 16));
    REQUIRE(std::abs(mean_entry_power - 0.25) < 3.0 * se);
}

TEST_CASE("channel power normalization holds for clustered models", "[channel]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, 1.0);
    const int n = 10000;
    std::vector<double> power(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(78, static_cast<std::uint64_t>(i));
        power[static_cast<std::size_t>(i)] =
            sample_channel(model, rng).squaredNorm() / static_cast<double>(model.r);
    }
    double mean = 0.0;
    for (double p : power) mean += p;
    mean /= n;
    double var = 0.0;
    for (double p : power) var += (p - mean) * (p - mean);
    var /= (n - 1);
    const double se = std::sqrt(var / n);
    REQUIRE(std::abs(mean - 1.0) < 3.0 * se);
}

TEST_CASE("channel sampling is deterministic", "[channel]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, 0.5);
    RngStream a(5, 3);
    RngStream b(5, 3);
    REQUIRE(sample_channel(model, a) == sample_channel(model, b));
}

TEST_CASE("second-order statistics factor into the correlation matrices", "[channel]") {
    // E(H_{i1,j1} conj(H_{i2,j2})) = (1/t) C_R(i1,i2) C_T(j2,j1)
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 3}, {kPi / 12.0, 0.5, 3}, 1.0);
    const int n = 100000;
    struct Pair {
        Index i1, j1, i2, j2;
    };
    const Pair pairs[3] = {{0, 0, 1, 0}, {0, 1, 0, 2}, {2, 1, 1, 2}};
    std::vector<Complex> samples[3];
    for (int p = 0; p < 3; ++p) samples[p].reserve(n);
    for (int s = 0; s < n; ++s) {
        RngStream rng(79, static_cast<std::uint64_t>(s));
        const CMatrix h = sample_channel(model, rng);
        for (int p = 0; p < 3; ++p)
            samples[p].push_back(h(pairs[p].i1, pairs[p].j1) *
                                 std::conj(h(pairs[p].i2, pairs[p].j2)));
    }
    for (int p = 0; p < 3; ++p) {
        const Complex expected = model.c_r(pairs[p].i1, pairs[p].i2) *
                                 model.c_t(pairs[p].j2, pairs[p].j1) /
                                 static_cast<double>(model.t);
        Complex mean = 0.0;
        for (const Complex& v : samples[p]) mean += v;
        mean /= static_cast<double>(n);
        double var_re = 0.0, var_im = 0.0;
        for (const Complex& v : samples[p]) {
            var_re += (v.real() - mean.real()) * (v.real() - mean.real());
            var_im += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
        }
        const double se =
            std::sqrt((var_re + var_im) / static_cast<double>(n - 1) / static_cast<double>(n));
        REQUIRE(std::abs(mean - expected) < 3.0 * se);
    }
}

TEST_CASE("effective correlation through a precoder", "[channel]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, 1.0);

    SECTION("identity precoder returns the transmit correlation") {
        const CMatrix c = effective_transmit_correlation(model, CMatrix::Identity(4, 4));
        REQUIRE((c - model.c_t).norm() < 1e-14);
    }
    SECTION("zero precoder returns the zero matrix") {
        const CMatrix c = effective_transmit_correlation(model, CMatrix::Zero(4, 4));
        REQUIRE(c.norm() == 0.0);
    }
    SECTION("structured precoder diagonalizes exactly") {
        const HermitianEig eig = herm_eig(model.c_t);
        RVector lambda(4);
        lambda << 1.2, 0.9, 0.5, 0.1;
        // keep the allocation feasible
        double budget = 0.0;
        for (Index j = 0; j < 4; ++j) budget += lambda(j) / eig.eigenvalues(j);
        lambda *= 4.0 / budget;
        CMatrix k = CMatrix::Zero(4, 4);
        for (Index j = 0; j < 4; ++j)
            k.col(j) = eig.eigenvectors.col(j) * std::sqrt(lambda(j) / eig.eigenvalues(j));
        const CMatrix c = effective_transmit_correlation(model, k);
        CMatrix expected = CMatrix::Zero(4, 4);
        expected.diagonal() = lambda.cast<Complex>();
        REQUIRE((c - expected).norm() < 1e-12);
    }
    SECTION("power violation throws") {
        REQUIRE_THROWS_AS(effective_transmit_correlation(model, 2.0 * CMatrix::Identity(4, 4)),
                          ConstraintError);
    }
}

TEST_CASE("model construction validates inputs", "[channel]") {
    REQUIRE_THROWS_AS(make_iid_model(4, 4, -1.0), DomainError);
    CMatrix indefinite = CMatrix::Identity(3, 3);
    indefinite(2, 2) = -2.0;
    REQUIRE_THROWS_AS(make_channel_model(indefinite, CMatrix::Identity(3, 3), 1.0), DomainError);

    // user-supplied matrices are trace-normalized on entry
    const ChannelModel scaled = make_channel_model(3.0 * CMatrix::Identity(4, 4),
                                                   CMatrix::Identity(4, 4), 1.0);
    REQUIRE(scaled.c_t.trace().real() / 4.0 == Catch::Approx(1.0).margin(1e-12));
}
