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

#ifndef LSMIMO_ERRORS_HPP
#define LSMIMO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lsmimo {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Mismatched or non-square matrix dimensions.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (negative noise
/// variance, indefinite correlation matrix, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Cholesky pivot failure: the matrix is not positive definite.
class DefinitenessError : public Error {
  public:
    DefinitenessError(const std::string& msg, long pivot_index)
        : Error(msg), pivot(pivot_index) {}

    /// Zero-based index of the first non-positive pivot.
    long pivot;
};

/// Iterative method failed to converge within its iteration budget.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& msg, double last_residual, int iterations)
        : Error(msg), residual(last_residual), iterations(iterations) {}

    double residual;
    int iterations;
};

/// Generic numerical breakdown (eigeniteration failure, invalid result).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Violated power or feasibility constraint.
class ConstraintError : public Error {
  public:
    using Error::Error;
};

/// Stability margin 1 - sigma^4 * gamma * gamma_tilde is not positive, so the
/// variance-correction machinery is undefined.
class StabilityError : public Error {
  public:
    using Error::Error;
};

/// Implicit-differentiation system is singular at the requested point.
class DegeneratePointError : public Error {
  public:
    using Error::Error;
};

/// Requested a mode of the transmit correlation with (numerically) zero
/// eigenvalue; the structured precoder cannot invert it.
class RankDeficiencyError : public Error {
  public:
    using Error::Error;
};

}  // namespace lsmimo

#endif  // LSMIMO_ERRORS_HPP
