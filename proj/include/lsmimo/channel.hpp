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

#ifndef LSMIMO_CHANNEL_HPP
#define LSMIMO_CHANNEL_HPP

#include <cmath>
#include <string>

#include "matcore.hpp"

namespace lsmimo {

/// One scatterer cluster seen from a uniform linear array: mean angle of the
/// cluster, angular standard deviation, and the number of antennas.
struct ClusterSpec {
    double mean_angle = 0.0;  // radians
    double angle_std = 0.0;   // radians, >= 0
    Index size = 1;           // antennas, >= 1
};

/// Antenna correlation matrix of the clustered-scatterer model:
///   entry(k,l) = exp(-i*pi*(k-l)*cos(phi)) * exp(-((pi*(k-l)*sin(phi)*std)^2)/2)
/// Unit diagonal, so the normalized trace is 1 by construction. A vanishing
/// angular spread collapses the matrix to (numerical) rank one.
inline CMatrix clustered_correlation(const ClusterSpec& spec) {
    if (spec.size < 1)
        throw DomainError("clustered_correlation: antenna count must be >= 1");
    if (!(spec.angle_std >= 0.0))
        throw DomainError("clustered_correlation: angle spread must be >= 0");
    const double c = std::cos(spec.mean_angle);
    const double s = std::sin(spec.mean_angle);
    const double pi = 3.14159265358979323846;
    CMatrix out(spec.size, spec.size);
    for (Index k = 0; k < spec.size; ++k) {
        out(k, k) = 1.0;
        for (Index l = k + 1; l < spec.size; ++l) {
            const double m = static_cast<double>(k - l);
            const double spread = pi * m * s * spec.angle_std;
            const double magnitude = std::exp(-0.5 * spread * spread);
            const double phase = -pi * m * c;
            const Complex entry = magnitude * Complex(std::cos(phase), std::sin(phase));
            out(k, l) = entry;
            out(l, k) = std::conj(entry);
        }
    }
    return out;
}

/// Rescales a correlation matrix so that (1/n) Tr = 1.
inline CMatrix normalize_trace(const CMatrix& a) {
    if (a.rows() != a.cols())
        throw DimensionError("normalize_trace: matrix must be square");
    const double mean_diag = a.trace().real() / static_cast<double>(a.rows());
    if (!(mean_diag > 0.0))
        throw DomainError("normalize_trace: trace must be positive, got " +
                          std::to_string(mean_diag * static_cast<double>(a.rows())));
    return a / mean_diag;
}

/// Hermitian PSD square root; eigenvalues below zero are clamped before the
/// root, which copes with correlation models that are numerically
/// semi-definite.
inline CMatrix psd_sqrt(const CMatrix& a) {
    HermitianEig eig = herm_eig(a);
    const RVector clamped = eig.eigenvalues.cwiseMax(0.0);
    return eig.eigenvectors * clamped.cwiseSqrt().asDiagonal() * eig.eigenvectors.adjoint();
}

/// Kronecker channel ensemble H = (1/sqrt(t)) C_R^{1/2} X C_T^{1/2} with X
/// i.i.d. CN(0,1). Correlation matrices are stored trace-normalized together
/// with their precomputed square roots, so a model value is cheap to sample
/// from and safe to share across threads.
struct ChannelModel {
    Index t = 0;  // transmit antennas
    Index r = 0;  // receive antennas
    CMatrix c_t;  // t x t transmit correlation, (1/t) Tr = 1
    CMatrix c_r;  // r x r receive correlation, (1/r) Tr = 1
    double sigma2 = 1.0;

    CMatrix c_t_half;  // PSD square roots of the above
    CMatrix c_r_half;
};

namespace detail {

inline void require_psd(const CMatrix& a, const char* name) {
    const HermitianEig eig = herm_eig(a);
    const double top = eig.eigenvalues.size() ? eig.eigenvalues(0) : 0.0;
    const double tol = 1e-12 * std::max(1.0, top);
    if (eig.eigenvalues.minCoeff() < -tol)
        throw DomainError(std::string(name) + " must be positive semidefinite; min eigenvalue " +
                          std::to_string(eig.eigenvalues.minCoeff()));
}

}  // namespace detail

/// Validates, symmetrizes and trace-normalizes user-supplied correlation
/// matrices and caches their square roots.
inline ChannelModel make_channel_model(const CMatrix& c_t, const CMatrix& c_r, double sigma2) {
    if (!(sigma2 > 0.0))
        throw DomainError("make_channel_model: noise variance must be positive");
    if (!c_t.allFinite() || !c_r.allFinite())
        throw DomainError("make_channel_model: correlation matrices must be finite");
    ChannelModel model;
    model.t = c_t.rows();
    model.r = c_r.rows();
    model.c_t = normalize_trace(hermitian_part(c_t));
    model.c_r = normalize_trace(hermitian_part(c_r));
    detail::require_psd(model.c_t, "transmit correlation");
    detail::require_psd(model.c_r, "receive correlation");
    model.sigma2 = sigma2;
    model.c_t_half = psd_sqrt(model.c_t);
    model.c_r_half = psd_sqrt(model.c_r);
    return model;
}

inline ChannelModel make_clustered_model(const ClusterSpec& tx, const ClusterSpec& rx,
                                         double sigma2) {
    return make_channel_model(clustered_correlation(tx), clustered_correlation(rx), sigma2);
}

inline ChannelModel make_iid_model(Index t, Index r, double sigma2) {
    return make_channel_model(CMatrix::Identity(t, t), CMatrix::Identity(r, r), sigma2);
}

/// One r x t channel realization.
inline CMatrix sample_channel(const ChannelModel& model, RngStream& rng) {
    const CMatrix x = sample_circular_gaussian(model.r, model.t, rng);
    return (model.c_r_half * x * model.c_t_half) / std::sqrt(static_cast<double>(model.t));
}

/// Transmit-side correlation seen through a precoder: K^H C_T K. The power
/// constraint (1/t) Tr(K K^H) <= 1 is enforced up to a 1e-12 slack.
inline CMatrix effective_transmit_correlation(const ChannelModel& model, const CMatrix& k) {
    if (k.rows() != model.t || k.cols() != model.t)
        throw DimensionError("effective_transmit_correlation: precoder must be " +
                             std::to_string(model.t) + "x" + std::to_string(model.t));
    const double power = k.squaredNorm() / static_cast<double>(model.t);
    if (power > 1.0 + 1e-12)
        throw ConstraintError("effective_transmit_correlation: precoder power " +
                              std::to_string(power) + " exceeds the unit-trace constraint");
    return hermitian_part(k.adjoint() * model.c_t * k);
}

}  // namespace lsmimo

#endif  // LSMIMO_CHANNEL_HPP
