/*
 * Copyright 2026 The smoothdyn Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <smoothdyn/error.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

namespace smoothdyn {

using Complex = std::complex<double>;

/// Dense matrix over a fixed scalar. The scalar kind is part of the type, so a
/// real matrix can never be promoted to a complex one implicitly.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

/// Real sparse operator (normalized adjacency and friends). Always real: every
/// operator in this library is built from real edge weights.
using SparseOperator = Eigen::SparseMatrix<double>;

enum class ScalarKind { real64, complex128 };

template <typename T>
inline constexpr bool is_complex_v = std::is_same_v<T, Complex>;

template <typename T>
constexpr ScalarKind scalar_kind_of()
{
    static_assert(std::is_same_v<T, double> || std::is_same_v<T, Complex>);
    return is_complex_v<T> ? ScalarKind::complex128 : ScalarKind::real64;
}

/// Conjugate transpose; plain transpose for real matrices.
template <typename T>
Matrix<T> adjoint(const Matrix<T>& m)
{
    return m.adjoint();
}

template <typename T>
bool all_finite(const Matrix<T>& m)
{
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        const T v = m.data()[k];
        if constexpr (is_complex_v<T>) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        } else {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

/// Truncated exponential series sum_{i=0}^{t_max} M^i / i!, accumulated in
/// Horner form p_k = I + M p_{k+1} / (k+1).
template <typename T>
Matrix<T> mat_exp_taylor(const Matrix<T>& m, int t_max);

/// Scaling and squaring: scale so ||M / 2^s||_F <= 0.5, sum 30 Taylor terms,
/// then square s times. This is the reference exponential used everywhere an
/// "exact" exponential is needed.
template <typename T>
Matrix<T> mat_exp_reference(const Matrix<T>& m);

/// S - S^dagger. The result W satisfies W + W^dagger = 0 exactly.
template <typename T>
Matrix<T> skew_from_free(const Matrix<T>& s);

/// exp(S - S^dagger): unitary (complex) or orthogonal (real).
template <typename T>
Matrix<T> unitary_from_free(const Matrix<T>& s);

/// Symmetric sparse matrix storing the strict upper triangle and the diagonal.
class SparseSym
{
public:
    struct Entry
    {
        int i = 0;
        int j = 0;
        double value = 0.0;
    };

    SparseSym() = default;

    /// Entries must satisfy i < j < n with no duplicate (i, j) key.
    SparseSym(int n, std::vector<Entry> upper, std::vector<double> diagonal);

    int size() const { return m_n; }
    const std::vector<Entry>& entries() const { return m_entries; }
    const std::vector<double>& diagonal() const { return m_diagonal; }

    /// Value at (i, j) in either triangle; zero when absent. O(log nnz).
    double at(int i, int j) const;

    RealMatrix to_dense() const;
    SparseOperator to_sparse() const;

private:
    int m_n = 0;
    std::vector<Entry> m_entries; // sorted by (i, j)
    std::vector<double> m_diagonal;
};

} // namespace smoothdyn
