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
// Deterministic-equivalent engine. The coupled scalar system
//
//   delta       = (1/t) Tr[ C_T (sigma^2 (I + delta_tilde C_T))^{-1} ]
//   delta_tilde = (1/t) Tr[ C_R (sigma^2 (I + delta C_R))^{-1} ]
//
// has a unique strictly positive solution whenever both correlation matrices
// carry power. Everything downstream (the large-system mutual-information
// approximations, their variance correction, and the gradients used by the
// precoder optimizer) is an explicit function of that solution.

#ifndef LSMIMO_LARGESYS_HPP
#define LSMIMO_LARGESYS_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "matcore.hpp"

namespace lsmimo {

struct FixedPointOptions {
    int max_iter = 10000;
    double step_tol = 1e-13;      // relative change of (delta, delta_tilde)
    double residual_tol = 1e-12;  // relative equation residual
};

/// Solution of the coupled fixed point in the eigenbasis: only the
/// eigenvalues of the two correlation matrices enter the scalar system.
struct ScalarFixedPoint {
    double delta = 0.0;
    double delta_tilde = 0.0;
    double gamma = 0.0;
    double gamma_tilde = 0.0;
    double stability = 1.0;  // 1 - sigma^4 * gamma * gamma_tilde
    double residual = 0.0;   // relative residual of the two equations at exit
    int iterations = 0;
};

namespace detail {

/// (1/t) sum_j e_j / (sigma^2 (1 + coupling e_j))
inline double resolvent_trace(const RVector& eigs, double coupling, double sigma2, double t) {
    double acc = 0.0;
    for (Index j = 0; j < eigs.size(); ++j) acc += eigs(j) / (1.0 + coupling * eigs(j));
    return acc / (sigma2 * t);
}

/// (1/t) sum_j (e_j / (sigma^2 (1 + coupling e_j)))^2
inline double resolvent_trace_sq(const RVector& eigs, double coupling, double sigma2, double t) {
    double acc = 0.0;
    for (Index j = 0; j < eigs.size(); ++j) {
        const double w = eigs(j) / (sigma2 * (1.0 + coupling * eigs(j)));
        acc += w * w;
    }
    return acc / t;
}

inline double rel_gap(double value, double target) {
    const double num = std::abs(value - target);
    if (num == 0.0) return 0.0;
    return num / std::max(std::abs(value), 1e-300);
}

}  // namespace detail

/// Solves the scalar fixed point for eigenvalue vectors d (transmit side,
/// defines the normalization t = d.size()) and d_tilde (receive side).
/// Alternating substitution with 0.5 damping whenever the residual fails to
/// decrease; `warm_delta` seeds the iteration when a nearby solution is known.
inline ScalarFixedPoint solve_fixed_point_eigs(const RVector& d, const RVector& d_tilde,
                                               double sigma2,
                                               const FixedPointOptions& opt = {},
                                               const double* warm_delta = nullptr) {
    if (!(sigma2 > 0.0))
        throw DomainError("solve_fixed_point: noise variance must be positive");
    if (d.size() == 0 || d_tilde.size() == 0)
        throw DimensionError("solve_fixed_point: empty eigenvalue vector");
    const double t = static_cast<double>(d.size());

    const auto f = [&](double dt) { return detail::resolvent_trace(d, dt, sigma2, t); };
    const auto g = [&](double dl) { return detail::resolvent_trace(d_tilde, dl, sigma2, t); };

    double delta = warm_delta ? *warm_delta : d.sum() / (t * sigma2);
    if (!(delta >= 0.0)) delta = 0.0;
    double delta_tilde = g(delta);
    double residual = detail::rel_gap(delta, f(delta_tilde));

    ScalarFixedPoint out;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        double next = f(delta_tilde);
        double next_tilde = g(next);
        double next_residual = detail::rel_gap(next, f(next_tilde));
        if (next_residual > residual) {
            next = 0.5 * (delta + next);
            next_tilde = g(next);
            next_residual = detail::rel_gap(next, f(next_tilde));
        }
        const double step = std::max(detail::rel_gap(next, delta),
                                     detail::rel_gap(next_tilde, delta_tilde));
        delta = next;
        delta_tilde = next_tilde;
        residual = next_residual;
        if (step < opt.step_tol && residual < opt.residual_tol) {
            ++iter;
            break;
        }
    }
    if (residual >= opt.residual_tol)
        throw ConvergenceError("solve_fixed_point: residual " + std::to_string(residual) +
                                   " after " + std::to_string(iter) + " iterations",
                               residual, iter);

    out.delta = delta;
    out.delta_tilde = delta_tilde;
    out.gamma = detail::resolvent_trace_sq(d, delta_tilde, sigma2, t);
    out.gamma_tilde = detail::resolvent_trace_sq(d_tilde, delta, sigma2, t);
    out.stability = 1.0 - sigma2 * sigma2 * out.gamma * out.gamma_tilde;
    out.residual = residual;
    out.iterations = iter;
    return out;
}

/// Full fixed-point solution carrying the matrix-valued deterministic
/// equivalents T_T, T_R and the spectral data they were built from.
struct FixedPointSolution {
    double delta = 0.0;
    double delta_tilde = 0.0;
    CMatrix t_t;  // (sigma^2 (I + delta_tilde C_T))^{-1}
    CMatrix t_r;  // (sigma^2 (I + delta C_R))^{-1}
    double gamma = 0.0;
    double gamma_tilde = 0.0;
    double stability = 1.0;
    double residual = 0.0;
    int iterations = 0;

    double sigma2 = 1.0;
    Index t = 0;
    Index r = 0;
    RVector ct_eigenvalues;  // decreasing
    RVector cr_eigenvalues;  // decreasing
    CMatrix ct_eigenvectors;
    CMatrix cr_eigenvectors;
};

/// Solves the fixed point for an effective transmit correlation (possibly a
/// precoded K^H C_T K) against a receive correlation. Both inputs are
/// symmetrized and eigendecomposed once; the scalar system then runs on the
/// eigenvalues alone.
inline FixedPointSolution solve_fixed_point(const CMatrix& c_t_eff, const CMatrix& c_r,
                                            double sigma2,
                                            const FixedPointOptions& opt = {}) {
    if (!(sigma2 > 0.0))
        throw DomainError("solve_fixed_point: noise variance must be positive");
    HermitianEig eig_t = herm_eig(c_t_eff);
    HermitianEig eig_r = herm_eig(c_r);
    const double top_t = eig_t.eigenvalues.size() ? std::max(eig_t.eigenvalues(0), 0.0) : 0.0;
    const double top_r = eig_r.eigenvalues.size() ? std::max(eig_r.eigenvalues(0), 0.0) : 0.0;
    if (eig_t.eigenvalues.minCoeff() < -1e-10 * std::max(1.0, top_t))
        throw DomainError("solve_fixed_point: effective transmit correlation must be PSD");
    if (eig_r.eigenvalues.minCoeff() < -1e-10 * std::max(1.0, top_r))
        throw DomainError("solve_fixed_point: receive correlation must be PSD");
    const RVector d = eig_t.eigenvalues.cwiseMax(0.0);
    const RVector dt = eig_r.eigenvalues.cwiseMax(0.0);

    const ScalarFixedPoint s = solve_fixed_point_eigs(d, dt, sigma2, opt);

    FixedPointSolution out;
    out.delta = s.delta;
    out.delta_tilde = s.delta_tilde;
    out.gamma = s.gamma;
    out.gamma_tilde = s.gamma_tilde;
    out.stability = s.stability;
    out.residual = s.residual;
    out.iterations = s.iterations;
    out.sigma2 = sigma2;
    out.t = c_t_eff.rows();
    out.r = c_r.rows();
    out.ct_eigenvalues = d;
    out.cr_eigenvalues = dt;
    out.ct_eigenvectors = eig_t.eigenvectors;
    out.cr_eigenvectors = eig_r.eigenvectors;

    const RVector tau_t =
        (sigma2 * (RVector::Ones(d.size()) + s.delta_tilde * d).array()).inverse().matrix();
    const RVector tau_r =
        (sigma2 * (RVector::Ones(dt.size()) + s.delta * dt).array()).inverse().matrix();
    out.t_t = hermitian_part(eig_t.eigenvectors * tau_t.asDiagonal() * eig_t.eigenvectors.adjoint());
    out.t_r = hermitian_part(eig_r.eigenvectors * tau_r.asDiagonal() * eig_r.eigenvectors.adjoint());
    return out;
}

/// First-order approximation and its per-stream terms -log(sigma^2 T_T,jj),
/// plus the second-order correction and their sum.
struct ApproxReport {
    double i_hat = 0.0;   // nats
    double j_bar = 0.0;   // nats
    double i_bar = 0.0;   // nats, = i_hat + j_bar
    RVector per_stream;   // -log(sigma^2 T_T,jj), one entry per transmit antenna
};

/// -sum_j log(sigma^2 T_T,jj). The diagonal entries lie in (0, 1], so the
/// result is nonnegative; rounding slightly above 1 is clamped.
inline double i_hat(const FixedPointSolution& fp, RVector* per_stream = nullptr) {
    const RVector diag = (fp.sigma2 * fp.t_t).diagonal().real();
    RVector streams(diag.size());
    for (Index j = 0; j < diag.size(); ++j) {
        const double v = std::min(diag(j), 1.0);
        if (!(v > 0.0))
            throw NumericalError("i_hat: nonpositive diagonal of sigma^2 T_T at index " +
                                 std::to_string(j));
        streams(j) = -std::log(v);
    }
    if (per_stream) *per_stream = streams;
    return streams.sum();
}

/// Variance-correction term
///   (1/(2 delta_tilde^2)) * gamma_tilde/(1 - sigma^4 gamma gamma_tilde)
///   * (1/t) sum_j (1 - ((sigma^2 T_T)^2)_jj / (sigma^2 T_T)_jj)^2.
/// For a diagonal effective correlation this reduces to
/// (1/2) sigma^4 gamma gamma_tilde / (1 - sigma^4 gamma gamma_tilde).
inline double j_bar(const FixedPointSolution& fp) {
    if (!(fp.stability > 0.0))
        throw StabilityError("j_bar: stability margin " + std::to_string(fp.stability) +
                             " is not positive");
    const CMatrix st = fp.sigma2 * fp.t_t;
    const RVector diag = st.diagonal().real();
    const RVector diag_sq = (st * st).diagonal().real();
    double acc = 0.0;
    for (Index j = 0; j < diag.size(); ++j) {
        const double term = 1.0 - diag_sq(j) / diag(j);
        acc += term * term;
    }
    if (acc == 0.0) return 0.0;  // zero-power channel: no fluctuation to correct
    const double t = static_cast<double>(fp.t);
    return acc * fp.gamma_tilde /
           (2.0 * fp.delta_tilde * fp.delta_tilde * fp.stability * t);
}

/// Corrected approximation: i_bar = i_hat + j_bar by definition.
inline ApproxReport i_bar(const FixedPointSolution& fp) {
    ApproxReport report;
    report.i_hat = i_hat(fp, &report.per_stream);
    report.j_bar = j_bar(fp);
    report.i_bar = report.i_hat + report.j_bar;
    return report;
}

/// Predicted variance of the resolvent quadratic form u Q u^H in the
/// eigenbasis: (1/t) * sigma^4 gamma_tilde/(1 - sigma^4 gamma gamma_tilde)
/// * (u T^2 D u^H)^2, with D the transmit eigenvalues and T the diagonal
/// deterministic equivalent.
inline double quadform_variance_prediction(const FixedPointSolution& fp, const CVector& u) {
    if (u.size() != fp.ct_eigenvalues.size())
        throw DimensionError("quadform_variance_prediction: vector length " +
                             std::to_string(u.size()) + ", expected " +
                             std::to_string(fp.ct_eigenvalues.size()));
    if (std::abs(u.norm() - 1.0) > 1e-8)
        throw DomainError("quadform_variance_prediction: vector must have unit norm");
    if (!(fp.stability > 0.0))
        throw StabilityError("quadform_variance_prediction: stability margin " +
                             std::to_string(fp.stability) + " is not positive");
    double quad = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
        const double dj = fp.ct_eigenvalues(j);
        const double tjj = 1.0 / (fp.sigma2 * (1.0 + fp.delta_tilde * dj));
        quad += std::norm(u(j)) * dj * tjj * tjj;
    }
    const double t = static_cast<double>(fp.t);
    const double s4 = fp.sigma2 * fp.sigma2;
    return (s4 * fp.gamma_tilde / fp.stability) * quad * quad / t;
}

/// Objective of the structured-precoder problem for diagonal effective
/// correlation Lambda: sum_j log(1 + lambda_j delta_tilde) plus, when
/// `with_correction` is set, (1/2) sigma^4 gamma gamma_tilde / (1 - sigma^4
/// gamma gamma_tilde). Natural log throughout.
inline double structured_objective(const RVector& lambda, const RVector& cr_eigs, double sigma2,
                                   bool with_correction = true,
                                   const FixedPointOptions& opt = {}) {
    const ScalarFixedPoint s = solve_fixed_point_eigs(lambda, cr_eigs, sigma2, opt);
    double obj = 0.0;
    for (Index j = 0; j < lambda.size(); ++j) obj += std::log1p(lambda(j) * s.delta_tilde);
    if (with_correction) {
        const double u = sigma2 * sigma2 * s.gamma * s.gamma_tilde;
        if (!(1.0 - u > 0.0))
            throw StabilityError("structured_objective: stability margin is not positive");
        obj += 0.5 * u / (1.0 - u);
    }
    return obj;
}

/// Gradient of structured_objective with respect to the diagonal entries
/// lambda_j, by implicit differentiation of the fixed-point system: the
/// 2x2 linear system for (d delta, d delta_tilde) has determinant equal to
/// the stability margin, and the chain rule carries the solution through
/// delta_tilde, gamma and gamma_tilde.
inline RVector grad_lambda(const RVector& lambda, const RVector& cr_eigs, double sigma2,
                           bool with_correction = true,
                           const FixedPointOptions& opt = {}) {
    const ScalarFixedPoint s = solve_fixed_point_eigs(lambda, cr_eigs, sigma2, opt);
    const double t = static_cast<double>(lambda.size());
    const double s2 = sigma2;
    const double s4 = sigma2 * sigma2;

    const double det = s.stability;  // 1 - (s2 gamma)(s2 gamma_tilde)
    if (std::abs(det) < 1e-14)
        throw DegeneratePointError("grad_lambda: singular implicit system, determinant " +
                                   std::to_string(det));

    double sum_ratio = 0.0;       // sum lambda_j / (1 + delta_tilde lambda_j)
    double sum_l3 = 0.0;          // sum lambda_j^3 / (1 + delta_tilde lambda_j)^3
    for (Index j = 0; j < lambda.size(); ++j) {
        const double w = 1.0 + s.delta_tilde * lambda(j);
        sum_ratio += lambda(j) / w;
        sum_l3 += lambda(j) * lambda(j) * lambda(j) / (w * w * w);
    }
    double sum_c3 = 0.0;  // sum c_i^3 / (1 + delta c_i)^3
    for (Index i = 0; i < cr_eigs.size(); ++i) {
        const double w = 1.0 + s.delta * cr_eigs(i);
        sum_c3 += cr_eigs(i) * cr_eigs(i) * cr_eigs(i) / (w * w * w);
    }
    const double dgamma_ddt = -2.0 * sum_l3 / (t * s4);        // d gamma / d delta_tilde
    const double dgammat_dd = -2.0 * sum_c3 / (t * s4);        // d gamma_tilde / d delta
    const double u = s4 * s.gamma * s.gamma_tilde;
    const double dj_du = 0.5 / ((1.0 - u) * (1.0 - u));

    RVector grad(lambda.size());
    for (Index k = 0; k < lambda.size(); ++k) {
        const double w = 1.0 + s.delta_tilde * lambda(k);
        const double rhs = 1.0 / (t * s2 * w * w);
        const double ddelta = rhs / det;
        const double ddelta_tilde = -(s2 * s.gamma_tilde) * rhs / det;
        double g = s.delta_tilde / w + sum_ratio * ddelta_tilde;
        if (with_correction) {
            const double dgamma = 2.0 * lambda(k) / (t * s4 * w * w * w) + dgamma_ddt * ddelta_tilde;
            const double dgamma_tilde = dgammat_dd * ddelta;
            const double du = s4 * (s.gamma_tilde * dgamma + s.gamma * dgamma_tilde);
            g += dj_du * du;
        }
        grad(k) = g;
    }
    return grad;
}

}  // namespace lsmimo

#endif  // LSMIMO_LARGESYS_HPP
