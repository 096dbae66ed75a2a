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

#include "helpers.hpp"

#include <smoothdyn/autodiff.hpp>
#include <smoothdyn/graph.hpp>

#include <doctest.h>

#include <algorithm>

using namespace smoothdyn;
using namespace smoothdyn::test;

namespace {

std::shared_ptr<const SparseOperator> cycle_operator(int n)
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return std::make_shared<const SparseOperator>(normalized_adjacency_sparse(Graph(n, edges)));
}

// Sum of squares as a scalar loss: mse against zero times the entry count.
template <typename T>
NodeId sum_squares(Tape<T>& tape, NodeId x)
{
    const Eigen::Index rows = tape.value(x).rows();
    const Eigen::Index cols = tape.value(x).cols();
    const NodeId zero = tape.constant(Matrix<T>::Zero(rows, cols));
    return tape.scalar_multiply(T(static_cast<double>(rows * cols)), tape.mse(x, zero));
}

} // namespace

TEST_SUITE("autodiff")
{
    TEST_CASE("forward values of basic ops")
    {
        Rng rng(1);
        const RealMatrix a = random_real(rng, 2, 3);
        const RealMatrix b = random_real(rng, 3, 4);
        Tape<double> t;
        const NodeId p = t.matmul(t.constant(a), t.constant(b));
        CHECK(t.value(p).isApprox(a * b));
        CHECK(t.value(p).rows() == 2);
        CHECK(t.value(p).cols() == 4);
        const NodeId s = t.slice_columns(p, 1, 2);
        CHECK(t.value(s) == (a * b).middleCols(1, 2));
        const NodeId z = t.zero_pad(t.constant(a), 5);
        CHECK(t.value(z).leftCols(3) == a);
        CHECK(t.value(z).rightCols(2).norm() == 0.0);
    }

    TEST_CASE("group sort orders consecutive pairs in each row")
    {
        Rng rng(2);
        const RealMatrix x = random_real(rng, 7, 6);
        Tape<double> t;
        const RealMatrix y = t.value(t.group_sort(t.constant(x)));
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (Eigen::Index c = 0; c < x.cols(); c += 2) {
                const double lo = std::min(x(r, c), x(r, c + 1));
                const double hi = std::max(x(r, c), x(r, c + 1));
                CHECK(y(r, c) == lo);
                CHECK(y(r, c + 1) == hi);
            }
    }

    TEST_CASE("truncated operator exponential equals the explicit series")
    {
        Rng rng(3);
        const auto op = cycle_operator(6);
        const RealMatrix x = random_real(rng, 6, 3);
        const RealMatrix w = random_real(rng, 3, 3, 0.3);
        Tape<double> t;
        const RealMatrix y = t.value(t.truncated_exp_operator(op, t.constant(x), t.constant(w), 10));
        RealMatrix term = x;
        RealMatrix sum = x;
        for (int i = 1; i <= 10; ++i) {
            term = (*op * term) * w / static_cast<double>(i);
            sum += term;
        }
        CHECK((y - sum).norm() < 1e-12 * std::max(1.0, sum.norm()));
    }

    TEST_CASE("gradient of a quadratic and a linear form")
    {
        Rng rng(4);
        Param<double> x("x", random_real(rng, 3, 3));
        {
            Tape<double> t;
            t.backward(sum_squares(t, t.param(x)));
            CHECK((x.grad - 2.0 * x.value).norm() < 1e-12);
        }
        x.zero_grad();
        {
            // tr(W X) = sum of (W^T o X); gradient W^T.
            const RealMatrix w = random_real(rng, 3, 3);
            Tape<double> t;
            const NodeId h = t.hadamard(t.constant(w.transpose()), t.param(x));
            const NodeId ones = t.constant(RealMatrix::Ones(3, 1));
            const NodeId rows = t.matmul(h, ones);
            const NodeId total = t.matmul(t.constant(RealMatrix::Ones(1, 3)), rows);
            t.backward(total);
            CHECK((x.grad - w.transpose()).norm() < 1e-12);
        }
    }

    TEST_CASE("complex gradient convention")
    {
        // L = |z|^2 has dL/dRe + i dL/dIm = 2z.
        Param<Complex> z("z", ComplexMatrix::Constant(1, 1, Complex(0.3, -0.8)));
        Tape<Complex> t;
        t.backward(sum_squares(t, t.param(z)));
        CHECK(std::abs(z.grad(0, 0) - Complex(0.6, -1.6)) < 1e-12);
    }

    TEST_CASE("finite-difference checks for every op kind")
    {
        Rng rng(5);
        const auto op = cycle_operator(5);
        Param<double> a("a", random_real(rng, 5, 4, 0.5));
        Param<double> w("w", random_real(rng, 4, 4, 0.3));
        Param<double> s("s", random_real(rng, 1, 1));
        const RealMatrix target = random_real(rng, 5, 4);
        std::vector<Param<double>*> params{&a, &w, &s};

        const auto report = grad_check<double>(
            [&](Tape<double>& t) {
                const NodeId x = t.param(a);
                const NodeId wn = t.param(w);
                NodeId h = t.matmul(op, x);
                h = t.add(h, t.matmul(x, wn));
                h = t.subtract(h, t.scalar_multiply(t.param(s), x));
                h = t.hadamard(h, t.sin(x));
                h = t.group_sort(h);
                h = t.add(t.relu(h), t.truncated_exp_operator(op, x, wn, 4));
                h = t.add(h, t.transpose_conj(t.matmul(t.matrix_exp(wn), t.transpose_conj(x))));
                h = t.slice_columns(t.zero_pad(h, 6), 0, 4);
                return t.mse(h, t.constant(target));
            },
            params);
        CHECK(report.max_relative_error < 1e-6);
    }

    TEST_CASE("complex finite-difference check")
    {
        Rng rng(6);
        const auto op = cycle_operator(4);
        Param<Complex> x("x", random_complex(rng, 4, 3, 0.5));
        Param<Complex> w("w", random_complex(rng, 3, 3, 0.3));
        const ComplexMatrix target = random_complex(rng, 4, 3);
        std::vector<Param<Complex>*> params{&x, &w};
        const auto report = grad_check<Complex>(
            [&](Tape<Complex>& t) {
                const NodeId xn = t.param(x);
                const NodeId wn = t.param(w);
                NodeId h = t.truncated_exp_operator(op, xn, wn, 6);
                h = t.matmul(h, t.matrix_exp(t.subtract(wn, t.transpose_conj(wn))));
                return t.mse(h, t.constant(target));
            },
            params);
        CHECK(report.max_relative_error < 1e-6);
    }

    TEST_CASE("shape mismatches are dimension errors")
    {
        Tape<double> t;
        const NodeId a = t.constant(RealMatrix::Zero(2, 3));
        const NodeId b = t.constant(RealMatrix::Zero(2, 3));
        try {
            (void)t.matmul(a, b);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::dimension);
        }
    }
}
