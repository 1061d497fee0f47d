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
//
// Seeded Monte Carlo oracle. Realization i always draws from stream index i
// of the run seed, and sums are pairwise reductions over the stored
// per-realization values, so estimates are bit-identical regardless of the
// worker count.

#ifndef LSMIMO_MCSIM_HPP
#define LSMIMO_MCSIM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "largesys.hpp"

namespace lsmimo {

/// Monte Carlo estimate with its standard error and provenance.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

/// Pairwise (tree) summation; deterministic and independent of threading.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace detail {

/// Runs fn(i) for i in [0, n) across `workers` threads on disjoint blocks.
/// fn must only touch slot i of shared output.
template <class Fn>
inline void parallel_realizations(std::int64_t n, int workers, const Fn& fn) {
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw ? static_cast<int>(hw) : 1;
    }
    if (workers == 1 || n < 2 * workers) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t block = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * block;
        const std::int64_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline McEstimate mean_with_error(const std::vector<double>& values, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    if (n < 2) throw DomainError("mc estimate: need at least 2 realizations");
    McEstimate est;
    est.n = n;
    est.seed = seed;
    est.mean = pairwise_sum(values) / static_cast<double>(n);
    std::vector<double> devsq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - est.mean;
        devsq[i] = d * d;
    }
    const double var = pairwise_sum(devsq) / static_cast<double>(n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(n));
    return est;
}

/// Per-stream MMSE SINRs of one realization: beta_j = 1/(sigma^2 Q_jj) - 1
/// with Q = (K^H H^H H K + sigma^2 I)^{-1}.
inline RVector sinr_one_realization(const ChannelModel& model, const CMatrix& k,
                                    const CMatrix& h) {
    const CMatrix g = h * k;
    CMatrix a = g.adjoint() * g;
    a.diagonal().array() += model.sigma2;
    const RVector qdiag = inverse_diag(a);
    RVector beta(model.t);
    for (Index j = 0; j < model.t; ++j) {
        double b = 1.0 / (model.sigma2 * qdiag(j)) - 1.0;
        if (b < 0.0) {
            if (b < -1e-10)
                throw NumericalError("sinr: negative SINR " + std::to_string(b) +
                                     " beyond rounding slack at stream " + std::to_string(j));
            b = 0.0;
        }
        beta(j) = b;
    }
    return beta;
}

}  // namespace detail

/// n x t matrix of per-stream SINR samples; row i is drawn from stream i.
inline Eigen::MatrixXd sinr_samples(const ChannelModel& model, const CMatrix& k, std::int64_t n,
                                    std::uint64_t seed, int workers = 0) {
    const double power = k.squaredNorm() / static_cast<double>(model.t);
    if (power > 1.0 + 1e-12)
        throw ConstraintError("sinr_samples: precoder violates the power constraint");
    Eigen::MatrixXd out(n, model.t);
    detail::parallel_realizations(n, workers, [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const CMatrix h = sample_channel(model, rng);
        out.row(i) = detail::sinr_one_realization(model, k, h).transpose();
    });
    return out;
}

/// Ergodic mutual information of the MMSE receiver, E sum_j log(1 + beta_j),
/// estimated over n seeded realizations.
inline McEstimate emi_estimate(const ChannelModel& model, const CMatrix& k, std::int64_t n,
                               std::uint64_t seed, int workers = 0) {
    const double power = k.squaredNorm() / static_cast<double>(model.t);
    if (power > 1.0 + 1e-12)
        throw ConstraintError("emi_estimate: precoder violates the power constraint");
    std::vector<double> emi(static_cast<std::size_t>(n));
    detail::parallel_realizations(n, workers, [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        const CMatrix h = sample_channel(model, rng);
        const RVector beta = detail::sinr_one_realization(model, k, h);
        double acc = 0.0;
        for (Index j = 0; j < beta.size(); ++j) acc += std::log1p(beta(j));
        emi[static_cast<std::size_t>(i)] = acc;
    });
    return detail::mean_with_error(emi, seed);
}

/// Sample variance of the resolvent quadratic form u Q u^H in the eigenbasis
/// model Y = (1/sqrt(t)) D^{1/2} X Dtilde^{1/2}, Q = (Y Y^H + sigma^2 I)^{-1}.
/// The returned mean is the sample variance; its standard error uses the
/// fourth-moment formula.
inline McEstimate quadform_variance_estimate(const RVector& d, const RVector& d_tilde,
                                             double sigma2, const CVector& u, std::int64_t n,
                                             std::uint64_t seed, int workers = 0) {
    if (u.size() != d.size())
        throw DimensionError("quadform_variance_estimate: vector length mismatch");
    if (std::abs(u.norm() - 1.0) > 1e-8)
        throw DomainError("quadform_variance_estimate: vector must have unit norm");
    if (!(sigma2 > 0.0)) throw DomainError("quadform_variance_estimate: sigma2 must be positive");
    const Index t = d.size();
    const Index r = d_tilde.size();
    const RVector droot = d.cwiseMax(0.0).cwiseSqrt();
    const RVector dtroot = d_tilde.cwiseMax(0.0).cwiseSqrt();
    const double inv_sqrt_t = 1.0 / std::sqrt(static_cast<double>(t));

    std::vector<double> values(static_cast<std::size_t>(n));
    detail::parallel_realizations(n, workers, [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        CMatrix y = sample_circular_gaussian(t, r, rng);
        for (Index a = 0; a < t; ++a)
            for (Index b = 0; b < r; ++b) y(a, b) *= inv_sqrt_t * droot(a) * dtroot(b);
        CMatrix q = y * y.adjoint();
        q.diagonal().array() += sigma2;
        const CMatrix x = chol_solve(q, u);
        values[static_cast<std::size_t>(i)] = (u.adjoint() * x)(0, 0).real();
    });

    const std::int64_t m = n;
    if (m < 2) throw DomainError("quadform_variance_estimate: need at least 2 realizations");
    const double mean = pairwise_sum(values) / static_cast<double>(m);
    std::vector<double> devsq(values.size()), dev4(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double dv = values[i] - mean;
        devsq[i] = dv * dv;
        dev4[i] = dv * dv * dv * dv;
    }
    const double s2 = pairwise_sum(devsq) / static_cast<double>(m - 1);
    const double m4 = pairwise_sum(dev4) / static_cast<double>(m);
    McEstimate est;
    est.n = m;
    est.seed = seed;
    est.mean = s2;
    const double nn = static_cast<double>(m);
    const double var_of_var = (m4 - (nn - 3.0) / (nn - 1.0) * s2 * s2) / nn;
    est.std_error = var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
    return est;
}

}  // namespace lsmimo

#endif  // LSMIMO_MCSIM_HPP
