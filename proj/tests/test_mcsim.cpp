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

#include <lsmimo/largesys.hpp>
#include <lsmimo/mcsim.hpp>

using namespace lsmimo;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature oracle for E log(1 + X), X ~ Exp(1): adaptive Simpson on
// log1p(x) exp(-x) over [0, 50]; the truncated tail is below 1e-18.
double rayleigh_emi_oracle() {
    struct Simpson {
        static double eval(double x) { return std::log1p(x) * std::exp(-x); }
        static double rule(double a, double b) {
            return (b - a) / 6.0 * (eval(a) + 4.0 * eval(0.5 * (a + b)) + eval(b));
        }
        static double adapt(double a, double b, double whole, double tol, int depth) {
            const double m = 0.5 * (a + b);
            const double left = rule(a, m);
            const double right = rule(m, b);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return adapt(a, m, left, 0.5 * tol, depth - 1) +
                   adapt(m, b, right, 0.5 * tol, depth - 1);
        }
    };
    return Simpson::adapt(0.0, 50.0, Simpson::rule(0.0, 50.0), 1e-13, 40);
}

}  // namespace

TEST_CASE("SINRs vanish in the large-noise limit", "[mcsim]") {
    const ChannelModel model = make_iid_model(4, 4, 1e6);
    const Eigen::MatrixXd beta = sinr_samples(model, CMatrix::Identity(4, 4), 50, 91);
    REQUIRE(beta.maxCoeff() < 1e-3);
    REQUIRE(beta.minCoeff() >= 0.0);
}

TEST_CASE("zero precoder has exactly zero SINR and information", "[mcsim]") {
    const ChannelModel model = make_iid_model(4, 4, 1.0);
    const Eigen::MatrixXd beta = sinr_samples(model, CMatrix::Zero(4, 4), 16, 92);
    REQUIRE(beta.maxCoeff() == 0.0);
    REQUIRE(beta.minCoeff() == 0.0);
    const McEstimate est = emi_estimate(model, CMatrix::Zero(4, 4), 16, 92);
    REQUIRE(est.mean == 0.0);
    REQUIRE(est.std_error == 0.0);
}

TEST_CASE("scalar channel SINR matches the closed form per realization", "[mcsim]") {
    const double sigma2 = 0.7;
    const ChannelModel model = make_iid_model(1, 1, sigma2);
    const std::uint64_t seed = 93;
    const int n = 200;
    const Eigen::MatrixXd beta = sinr_samples(model, CMatrix::Identity(1, 1), n, seed);
    for (int i = 0; i < n; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const CMatrix h = sample_channel(model, rng);
        const double expected = std::norm(h(0, 0)) / sigma2;
        REQUIRE(beta(i, 0) == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("scalar Rayleigh mutual information matches the quadrature oracle", "[mcsim]") {
    const double oracle = rayleigh_emi_oracle();
    REQUIRE(oracle == Catch::Approx(0.5963473623231940).margin(1e-9));

    const ChannelModel model = make_iid_model(1, 1, 1.0);
    const McEstimate est = emi_estimate(model, CMatrix::Identity(1, 1), 100000, 94);
    REQUIRE(std::abs(est.mean - oracle) < 3.0 * est.std_error);
}

TEST_CASE("estimates are reproducible and worker-count independent", "[mcsim]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, 0.3);
    const McEstimate a = emi_estimate(model, CMatrix::Identity(4, 4), 2000, 95, 1);
    const McEstimate b = emi_estimate(model, CMatrix::Identity(4, 4), 2000, 95, 1);
    const McEstimate c = emi_estimate(model, CMatrix::Identity(4, 4), 2000, 95, 4);
    REQUIRE(a.mean == b.mean);
    REQUIRE(a.std_error == b.std_error);
    REQUIRE(a.mean == c.mean);
    REQUIRE(a.std_error == c.std_error);

    const Eigen::MatrixXd s1 = sinr_samples(model, CMatrix::Identity(4, 4), 500, 95, 1);
    const Eigen::MatrixXd s4 = sinr_samples(model, CMatrix::Identity(4, 4), 500, 95, 4);
    REQUIRE(s1 == s4);
}

TEST_CASE("Jensen sanity bound", "[mcsim]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, 0.1);
    const std::uint64_t seed = 96;
    const int n = 5000;
    const Eigen::MatrixXd beta = sinr_samples(model, CMatrix::Identity(4, 4), n, seed);
    const McEstimate est = emi_estimate(model, CMatrix::Identity(4, 4), n, seed);
    double jensen = 0.0;
    for (Index j = 0; j < 4; ++j) jensen += std::log1p(beta.col(j).mean());
    REQUIRE(est.mean <= jensen);
}

TEST_CASE("both representations of the per-realization information agree", "[mcsim]") {
    const double sigma2 = 0.25;
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 4}, {kPi / 12.0, 0.5, 4}, sigma2);
    const std::uint64_t seed = 97;
    const CMatrix k = CMatrix::Identity(4, 4);
    for (int i = 0; i < 100; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const CMatrix h = sample_channel(model, rng);
        const CMatrix g = h * k;
        CMatrix a = g.adjoint() * g;
        a.diagonal().array() += sigma2;
        const CMatrix q = chol_solve(a, CMatrix::Identity(4, 4));
        double via_beta = 0.0;
        double via_logdiag = 0.0;
        for (Index j = 0; j < 4; ++j) {
            via_beta += std::log1p(1.0 / (sigma2 * q(j, j).real()) - 1.0);
            via_logdiag -= std::log(sigma2 * q(j, j).real());
        }
        REQUIRE(via_beta == Catch::Approx(via_logdiag).margin(1e-12));
    }
    // and the estimator itself uses the same realizations
    const McEstimate est = emi_estimate(model, k, 100, seed);
    REQUIRE(est.n == 100);
}

TEST_CASE("quadratic-form variance with zero spectrum is zero", "[mcsim]") {
    CVector u = CVector::Zero(4);
    u(0) = 1.0;
    const McEstimate est = quadform_variance_estimate(RVector::Zero(4), RVector::Ones(4), 0.5,
                                                      u, 100, 98);
    REQUIRE(est.mean == 0.0);
}

TEST_CASE("empirical quadratic-form variance matches the prediction", "[mcsim]") {
    const ChannelModel model =
        make_clustered_model({kPi / 4.0, 0.5, 8}, {kPi / 12.0, 0.5, 8}, 0.1);
    const FixedPointSolution fp = solve_fixed_point(model.c_t, model.c_r, model.sigma2);
    CVector u = CVector::Zero(8);
    u(0) = 1.0;
    const double predicted = quadform_variance_prediction(fp, u);
    const McEstimate est = quadform_variance_estimate(
        fp.ct_eigenvalues, fp.cr_eigenvalues, model.sigma2, u, 100000, 99);
    REQUIRE(std::abs(est.mean - predicted) < 0.15 * predicted);
}

TEST_CASE("quadratic-form variance scales like 1/t", "[mcsim]") {
    CVector u8 = CVector::Zero(8);
    u8(0) = 1.0;
    CVector u16 = CVector::Zero(16);
    u16(0) = 1.0;
    const McEstimate v8 = quadform_variance_estimate(RVector::Ones(8), RVector::Ones(8), 0.1,
                                                     u8, 20000, 100);
    const McEstimate v16 = quadform_variance_estimate(RVector::Ones(16), RVector::Ones(16), 0.1,
                                                      u16, 20000, 100);
    const double ratio = v8.mean / v16.mean;
    REQUIRE(ratio > 1.5);
    REQUIRE(ratio < 2.7);
}

TEST_CASE("pairwise summation handles small and large inputs", "[mcsim]") {
    std::vector<double> v;
    REQUIRE(pairwise_sum(v) == 0.0);
    v = {1.0, 2.0, 3.0};
    REQUIRE(pairwise_sum(v) == 6.0);
    v.assign(1000, 0.1);
    REQUIRE(pairwise_sum(v) == Catch::Approx(100.0).epsilon(1e-12));
}
