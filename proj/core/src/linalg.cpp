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

#include <smoothdyn/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace smoothdyn {

namespace {

template <typename T>
void require_square(const Matrix<T>& m, const char* what)
{
    require(
        m.rows() == m.cols(),
        ErrorKind::dimension,
        std::string(what) + ": matrix must be square, got " + std::to_string(m.rows()) + "x" +
            std::to_string(m.cols()));
}

constexpr int k_reference_terms = 30;

} // namespace

template <typename T>
Matrix<T> mat_exp_taylor(const Matrix<T>& m, int t_max)
{
    require_square(m, "mat_exp_taylor");
    require(t_max >= 0, ErrorKind::argument, "mat_exp_taylor: t_max must be >= 0");
    const Eigen::Index n = m.rows();
    const Matrix<T> identity = Matrix<T>::Identity(n, n);
    Matrix<T> p = identity;
    for (int k = t_max - 1; k >= 0; --k) {
        p = identity + (m * p) / static_cast<double>(k + 1);
    }
    return p;
}

template <typename T>
Matrix<T> mat_exp_reference(const Matrix<T>& m)
{
    require_square(m, "mat_exp_reference");
    const double norm = m.norm();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Matrix<T> scaled = m / std::ldexp(1.0, squarings);
    Matrix<T> result = mat_exp_taylor(scaled, k_reference_terms);
    for (int s = 0; s < squarings; ++s) {
        result = (result * result).eval();
    }
    return result;
}

template <typename T>
Matrix<T> skew_from_free(const Matrix<T>& s)
{
    require_square(s, "skew_from_free");
    return s - s.adjoint();
}

template <typename T>
Matrix<T> unitary_from_free(const Matrix<T>& s)
{
    return mat_exp_reference(skew_from_free(s));
}

template Matrix<double> mat_exp_taylor(const Matrix<double>&, int);
template Matrix<Complex> mat_exp_taylor(const Matrix<Complex>&, int);
template Matrix<double> mat_exp_reference(const Matrix<double>&);
template Matrix<Complex> mat_exp_reference(const Matrix<Complex>&);
template Matrix<double> skew_from_free(const Matrix<double>&);
template Matrix<Complex> skew_from_free(const Matrix<Complex>&);
template Matrix<double> unitary_from_free(const Matrix<double>&);
template Matrix<Complex> unitary_from_free(const Matrix<Complex>&);

SparseSym::SparseSym(int n, std::vector<Entry> upper, std::vector<double> diagonal)
    : m_n(n)
    , m_entries(std::move(upper))
    , m_diagonal(std::move(diagonal))
{
    require(n >= 0, ErrorKind::argument, "SparseSym: negative size");
    require(
        static_cast<int>(m_diagonal.size()) == n,
        ErrorKind::dimension,
        "SparseSym: diagonal length must equal n");
    for (const Entry& e : m_entries) {
        require(
            e.i >= 0 && e.i < e.j && e.j < n,
            ErrorKind::argument,
            "SparseSym: entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                ") is not in the strict upper triangle");
    }
    std::sort(m_entries.begin(), m_entries.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < m_entries.size(); ++k) {
        require(
            m_entries[k].i != m_entries[k - 1].i || m_entries[k].j != m_entries[k - 1].j,
            ErrorKind::argument,
            "SparseSym: duplicate entry (" + std::to_string(m_entries[k].i) + ", " +
                std::to_string(m_entries[k].j) + ")");
    }
}

double SparseSym::at(int i, int j) const
{
    if (i == j) return m_diagonal.at(static_cast<std::size_t>(i));
    if (i > j) std::swap(i, j);
    const auto it = std::lower_bound(
        m_entries.begin(),
        m_entries.end(),
        Entry{i, j, 0.0},
        [](const Entry& a, const Entry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    if (it != m_entries.end() && it->i == i && it->j == j) return it->value;
    return 0.0;
}

RealMatrix SparseSym::to_dense() const
{
    RealMatrix out = RealMatrix::Zero(m_n, m_n);
    for (int i = 0; i < m_n; ++i) out(i, i) = m_diagonal[static_cast<std::size_t>(i)];
    for (const Entry& e : m_entries) {
        out(e.i, e.j) = e.value;
        out(e.j, e.i) = e.value;
    }
    return out;
}

SparseOperator SparseSym::to_sparse() const
{
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(m_entries.size() * 2 + static_cast<std::size_t>(m_n));
    for (int i = 0; i < m_n; ++i) {
        if (m_diagonal[static_cast<std::size_t>(i)] != 0.0)
            triplets.emplace_back(i, i, m_diagonal[static_cast<std::size_t>(i)]);
    }
    for (const Entry& e : m_entries) {
        triplets.emplace_back(e.i, e.j, e.value);
        triplets.emplace_back(e.j, e.i, e.value);
    }
    SparseOperator out(m_n, m_n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

} // namespace smoothdyn
