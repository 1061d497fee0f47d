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

#include <lsmimo/matcore.hpp>

using namespace lsmimo;

namespace {

CMatrix random_hermitian(Index n, RngStream& rng) {
    const CMatrix m = sample_circular_gaussian(n, n, rng);
    return hermitian_part(m);
}

CMatrix random_pd(Index n, RngStream& rng) {
    const CMatrix m = sample_circular_gaussian(n, n, rng);
    return CMatrix(m.adjoint() * m + CMatrix::Identity(n, n));
}

}  // namespace

TEST_CASE("herm_eig on the identity", "[matcore]") {
    const HermitianEig eig = herm_eig(CMatrix::Identity(4, 4));
    for (Index j = 0; j < 4; ++j) REQUIRE(eig.eigenvalues(j) == Catch::Approx(1.0).margin(1e-14));
    const CMatrix gram = eig.eigenvectors.adjoint() * eig.eigenvectors;
    REQUIRE((gram - CMatrix::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("herm_eig on a diagonal matrix sorts decreasing", "[matcore]") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 3.0;
    const HermitianEig eig = herm_eig(a);
    REQUIRE(eig.eigenvalues(0) == Catch::Approx(3.0).margin(1e-14));
    REQUIRE(eig.eigenvalues(1) == Catch::Approx(1.0).margin(1e-14));
    // eigenvectors are a permutation of the standard basis
    REQUIRE(std::abs(eig.eigenvectors(1, 0)) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(eig.eigenvectors(0, 1)) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("herm_eig reconstructs random Hermitian matrices", "[matcore]") {
    RngStream rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const CMatrix a = random_hermitian(6, rng);
        const HermitianEig eig = herm_eig(a);
        const CMatrix rebuilt = eig.eigenvectors * eig.eigenvalues.asDiagonal() *
                                eig.eigenvectors.adjoint();
        REQUIRE((rebuilt - a).norm() / a.norm() < 1e-10);
        REQUIRE((eig.eigenvectors.adjoint() * eig.eigenvectors - CMatrix::Identity(6, 6)).norm() <
                1e-10);
        for (Index j = 1; j < eig.eigenvalues.size(); ++j)
            REQUIRE(eig.eigenvalues(j - 1) >= eig.eigenvalues(j));
    }
}

TEST_CASE("herm_eig rejects non-square input", "[matcore]") {
    REQUIRE_THROWS_AS(herm_eig(CMatrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("chol_solve identities", "[matcore]") {
    RngStream rng(12, 0);
    const CMatrix b = sample_circular_gaussian(3, 2, rng);
    REQUIRE((chol_solve(CMatrix::Identity(3, 3), b) - b).norm() < 1e-14);

    const CMatrix half = chol_solve(2.0 * CMatrix::Identity(3, 3), CMatrix::Identity(3, 3));
    REQUIRE((half - 0.5 * CMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("chol_solve residual on random positive definite systems", "[matcore]") {
    RngStream rng(13, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const CMatrix a = random_pd(5, rng);
        const CMatrix b = sample_circular_gaussian(5, 3, rng);
        const CMatrix x = chol_solve(a, b);
        REQUIRE((a * x - b).norm() / b.norm() < 1e-10);
    }
}

TEST_CASE("chol_solve reports the failing pivot", "[matcore]") {
    CMatrix a = CMatrix::Identity(3, 3);
    a(1, 1) = -1.0;
    try {
        chol_solve(a, CMatrix::Identity(3, 3));
        FAIL("expected DefinitenessError");
    } catch (const DefinitenessError& e) {
        REQUIRE(e.pivot == 1);
    }
}

TEST_CASE("inverse_diag on diagonal matrices", "[matcore]") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 4.0;
    const RVector d = inverse_diag(a);
    REQUIRE(d(0) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(d(1) == Catch::Approx(0.25).margin(1e-15));

    const RVector noise = inverse_diag(0.5 * CMatrix::Identity(4, 4));
    for (Index j = 0; j < 4; ++j) REQUIRE(noise(j) == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("inverse_diag matches the full inverse", "[matcore]") {
    RngStream rng(14, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const CMatrix a = random_pd(5, rng);
        const RVector d = inverse_diag(a);
        const CMatrix inv = chol_solve(a, CMatrix::Identity(5, 5));
        for (Index j = 0; j < 5; ++j) {
            REQUIRE(d(j) > 0.0);
            REQUIRE(std::abs(d(j) - inv(j, j).real()) < 1e-12 * std::max(1.0, d(j)));
        }
    }
}

TEST_CASE("sample_circular_gaussian is deterministic per stream", "[matcore]") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    const CMatrix x = sample_circular_gaussian(4, 5, a);
    const CMatrix y = sample_circular_gaussian(4, 5, b);
    REQUIRE(x == y);

    RngStream c(42, 8);
    const CMatrix z = sample_circular_gaussian(4, 5, c);
    REQUIRE(x != z);
}

TEST_CASE("sample_circular_gaussian moments", "[matcore]") {
    const int n = 100000;
    RngStream rng(43, 0);
    double sum_re = 0.0, sum_im = 0.0, sum_sq = 0.0, sum_cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const Complex z = rng.circular_gaussian();
        sum_re += z.real();
        sum_im += z.imag();
        sum_sq += std::norm(z);
        sum_cross += z.real() * z.imag();
    }
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(sum_re / n) < 3.0 * inv_sqrt_n);
    REQUIRE(std::abs(sum_im / n) < 3.0 * inv_sqrt_n);
    // Var(|z|^2) = 1 for CN(0,1), Var(Re*Im) = 1/4
    REQUIRE(std::abs(sum_sq / n - 1.0) < 3.0 * inv_sqrt_n);
    REQUIRE(std::abs(sum_cross / n) < 3.0 * 0.5 * inv_sqrt_n);
}

TEST_CASE("distinct streams are uncorrelated", "[matcore]") {
    const int n = 10000;
    RngStream a(44, 0);
    RngStream b(44, 1);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = a.standard_normal();
        const double y = b.standard_normal();
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    REQUIRE(std::abs(dot / std::sqrt(na * nb)) < 0.05);
}
