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

#ifndef LSMIMO_MATCORE_HPP
#define LSMIMO_MATCORE_HPP

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"

namespace lsmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// (A + A^H)/2. Throws DimensionError on non-square input.
inline CMatrix hermitian_part(const CMatrix& a) {
    if (a.rows() != a.cols())
        throw DimensionError("hermitian_part: matrix must be square, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    return 0.5 * (a + a.adjoint());
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in decreasing order.
struct HermitianEig {
    RVector eigenvalues;   // sorted decreasing
    CMatrix eigenvectors;  // unitary, column k pairs with eigenvalues[k]
};

/// Hermitian eigendecomposition. The input is symmetrized first, so only the
/// Hermitian part of `a` matters.
inline HermitianEig herm_eig(const CMatrix& a) {
    if (a.rows() != a.cols())
        throw DimensionError("herm_eig: matrix must be square, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
    if (solver.info() != Eigen::Success)
        throw NumericalError("herm_eig: eigeniteration failed to converge within " +
                             std::to_string(32 * a.rows()) + " sweeps");
    HermitianEig out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

namespace detail {

/// In-place complex Cholesky A = L L^H. Reads the lower triangle only, so the
/// factorization of a nearly-Hermitian matrix equals the factorization of its
/// Hermitian part restricted to that triangle.
class Cholesky {
  public:
    explicit Cholesky(const CMatrix& a) : l_(a) {
        const Index n = a.rows();
        if (a.rows() != a.cols())
            throw DimensionError("cholesky: matrix must be square, got " +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        for (Index j = 0; j < n; ++j) {
            double d = l_(j, j).real();
            for (Index k = 0; k < j; ++k) d -= std::norm(l_(j, k));
            if (!(d > 0.0))
                throw DefinitenessError(
                    "cholesky: non-positive pivot " + std::to_string(d) +
                    " at index " + std::to_string(j) + "; matrix is not positive definite",
                    static_cast<long>(j));
            const double root = std::sqrt(d);
            l_(j, j) = root;
            for (Index i = j + 1; i < n; ++i) {
                Complex s = l_(i, j);
                for (Index k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
                l_(i, j) = s / root;
            }
        }
    }

    /// Solves A X = B.
    CMatrix solve(const CMatrix& b) const {
        const Index n = l_.rows();
        if (b.rows() != n)
            throw DimensionError("cholesky solve: right-hand side has " +
                                 std::to_string(b.rows()) + " rows, expected " +
                                 std::to_string(n));
        CMatrix x = b;
        for (Index c = 0; c < x.cols(); ++c) {
            // forward: L y = b
            for (Index i = 0; i < n; ++i) {
                Complex s = x(i, c);
                for (Index k = 0; k < i; ++k) s -= l_(i, k) * x(k, c);
                x(i, c) = s / l_(i, i).real();
            }
            // backward: L^H x = y
            for (Index i = n - 1; i >= 0; --i) {
                Complex s = x(i, c);
                for (Index k = i + 1; k < n; ++k) s -= std::conj(l_(k, i)) * x(k, c);
                x(i, c) = s / l_(i, i).real();
            }
        }
        return x;
    }

    /// diag(A^{-1}) as squared column norms of L^{-1}; avoids the full solve.
    RVector inverse_diag() const {
        const Index n = l_.rows();
        RVector out(n);
        CVector w(n);
        for (Index j = 0; j < n; ++j) {
            // forward-substitute e_j through L; w has support on rows j..n-1
            double acc = 0.0;
            for (Index i = j; i < n; ++i) {
                Complex s = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
                for (Index k = j; k < i; ++k) s -= l_(i, k) * w(k);
                w(i) = s / l_(i, i).real();
                acc += std::norm(w(i));
            }
            out(j) = acc;
        }
        return out;
    }

  private:
    CMatrix l_;
};

}  // namespace detail

/// Solves A X = B for Hermitian positive definite A.
inline CMatrix chol_solve(const CMatrix& a, const CMatrix& b) {
    detail::Cholesky factor(a);
    return factor.solve(b);
}

/// Real diagonal of A^{-1} for Hermitian positive definite A. Entries are
/// strictly positive.
inline RVector inverse_diag(const CMatrix& a) {
    detail::Cholesky factor(a);
    return factor.inverse_diag();
}

/// rows x cols matrix of i.i.d. CN(0,1) entries, filled row by row so the
/// draw order (and hence the result) is pinned by the stream alone.
inline CMatrix sample_circular_gaussian(Index rows, Index cols, RngStream& rng) {
    CMatrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = rng.circular_gaussian();
    return out;
}

}  // namespace lsmimo

#endif  // LSMIMO_MATCORE_HPP
