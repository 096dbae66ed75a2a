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

#include <smoothdyn/graph.hpp>
#include <smoothdyn/layers.hpp>
#include <smoothdyn/shapes.hpp>

#include <doctest.h>

#include <cmath>

using namespace smoothdyn;
using namespace smoothdyn::test;

namespace {

OperatorPtr graph_op(const Graph& g)
{
    return std::make_shared<const SparseOperator>(normalized_adjacency_sparse(g));
}

template <typename T>
Matrix<T> generator(Rng& rng, Eigen::Index d)
{
    return random_matrix<T>(rng, d, d, 1.0 / std::sqrt(2.0 * static_cast<double>(d)));
}

} // namespace

TEST_SUITE("layers")
{
    TEST_CASE("gcn with identity weights swaps K2")
    {
        const OperatorPtr op = graph_op(Graph(2, {{0, 1}}));
        Param<double> w("W", RealMatrix::Identity(1, 1));
        Tape<double> t;
        RealMatrix x(2, 1);
        x << 1, 0;
        const RealMatrix y = t.value(gcn_layer(t, t.constant(x), op, w, Activation::identity));
        CHECK(y(0, 0) == doctest::Approx(0.0));
        CHECK(y(1, 0) == doctest::Approx(1.0));
    }

    TEST_CASE("zero generators give identity maps")
    {
        const OperatorPtr op = graph_op(grid_graph(3, 4));
        Rng rng(1);
        const ComplexMatrix x = random_complex(rng, 12, 3);
        Param<Complex> t0("t", ComplexMatrix::Zero(1, 1), true);
        Param<Complex> s0("S", ComplexMatrix::Zero(3, 3));
        Tape<Complex> t;
        const NodeId in = t.constant(x);
        CHECK((t.value(sep_uni_conv(t, in, op, t0, s0)) - x).norm() < 1e-14);
        CHECK((t.value(lie_uni_conv(t, in, op, s0, 10)) - x).norm() == 0.0);
        CHECK((t.value(taylor_relaxed_conv(t, in, op, s0, 3)) - x).norm() == 0.0);
        CHECK(t.value(zero_pad_layer(t, in, 3)) == x);
        CHECK(error_kind_of([&] { (void)zero_pad_layer(t, in, 2); }) == ErrorKind::argument);

        const MeshOperators mops = mesh_operators(icosphere(1), true);
        Param<double> sm("S", RealMatrix::Zero(2, 2));
        Tape<double> tr;
        const RealMatrix xm = random_real(rng, mops.n, 2);
        CHECK(tr.value(uni_mesh_conv<double>(tr, tr.constant(xm), mops, MeshConvVariant::lie, sm, nullptr, 6)) == xm);
    }

    TEST_CASE("taylor relaxed conv with t_max = 1 is X + A X W")
    {
        const Graph g = grid_graph(4, 4);
        const OperatorPtr op = graph_op(g);
        Rng rng(2);
        const RealMatrix x = random_real(rng, 16, 4);
        Param<double> s("S", generator<double>(rng, 4));
        const RealMatrix w = s.value - s.value.transpose();
        Tape<double> t;
        const RealMatrix y = t.value(taylor_relaxed_conv(t, t.constant(x), op, s, 1));
        CHECK((y - (x + (*op * x) * w)).norm() < 1e-13);
    }

    TEST_CASE("unitary convolutions preserve norm and rayleigh quotient")
    {
        const Graph g = grid_graph(5, 5);
        const OperatorPtr op = graph_op(g);
        Rng rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            const ComplexMatrix x = random_complex(rng, 25, 4);
            Param<Complex> tp("t", ComplexMatrix::Constant(1, 1, Complex(0.8, 0.0)), true);
            Param<Complex> s("S", generator<Complex>(rng, 4));
            Tape<Complex> t;
            const NodeId in = t.constant(x);
            const ComplexMatrix a = t.value(sep_uni_conv(t, in, op, tp, s, 12));
            const ComplexMatrix b = t.value(lie_uni_conv(t, in, op, s, 20));
            const double rq = rayleigh_quotient(g, x);
            CHECK(std::abs(a.norm() - x.norm()) < 1e-8 * x.norm());
            CHECK(std::abs(b.norm() - x.norm()) < 1e-8 * x.norm());
            CHECK(std::abs(rayleigh_quotient(g, a) - rq) < 1e-8);
            CHECK(std::abs(rayleigh_quotient(g, b) - rq) < 1e-8);

            const RealMatrix xr = random_real(rng, 25, 4);
            Param<double> sr("S", generator<double>(rng, 4));
            Tape<double> tr;
            const RealMatrix br = tr.value(lie_uni_conv(tr, tr.constant(xr), op, sr, 20));
            CHECK(std::abs(br.norm() - xr.norm()) < 1e-8 * xr.norm());
            CHECK(std::abs(rayleigh_quotient(g, br) - rayleigh_quotient(g, xr)) < 1e-8);
        }
    }

    TEST_CASE("mesh convolution preserves the weighted rayleigh quotient")
    {
        const MeshOperators ops = mesh_operators(perturbed_icosphere(2, 0.05, 7), true);
        Rng rng(4);
        const RealMatrix x = random_real(rng, ops.n, 4);
        Param<double> s("S", generator<double>(rng, 4));
        Tape<double> t;
        const RealMatrix y = t.value(uni_mesh_conv<double>(t, t.constant(x), ops, MeshConvVariant::lie, s, nullptr, 20));
        CHECK(std::abs(mesh_rayleigh_quotient(ops, y) - mesh_rayleigh_quotient(ops, x)) < 1e-8);
        CHECK(error_kind_of([&] { (void)uni_mesh_conv(t, t.constant(x), ops, MeshConvVariant::sep, s, &s, 10); }) ==
              ErrorKind::config);
    }

    TEST_CASE("mesh convolution rejects negative weights")
    {
        MeshOperators ops = mesh_operators(icosphere(1), true);
        std::vector<SparseSym::Entry> entries = ops.cot_weights.entries();
        entries.front().value = -0.1;
        ops.cot_weights = SparseSym(ops.n, entries, ops.cot_weights.diagonal());
        Param<double> s("S", RealMatrix::Zero(1, 1));
        Tape<double> t;
        const NodeId x = t.constant(RealMatrix::Ones(ops.n, 1));
        CHECK(error_kind_of([&] { (void)uni_mesh_conv<double>(t, x, ops, MeshConvVariant::lie, s, nullptr, 3); }) ==
              ErrorKind::precondition);
    }

    TEST_CASE("taylor truncation error in the quotient shrinks with the order")
    {
        const Graph g = grid_graph(6, 6);
        const OperatorPtr op = graph_op(g);
        const std::vector<int> orders{1, 2, 3, 5, 10};
        std::vector<double> mean_gap(orders.size(), 0.0);
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            const RealMatrix x = random_real(rng, 36, 8);
            Param<double> s("S", generator<double>(rng, 8));
            const double rq = rayleigh_quotient(g, x);
            for (std::size_t k = 0; k < orders.size(); ++k) {
                Tape<double> t;
                const RealMatrix y = t.value(taylor_relaxed_conv(t, t.constant(x), op, s, orders[k]));
                mean_gap[k] += std::abs(rayleigh_quotient(g, y) - rq) / 50.0;
            }
        }
        for (std::size_t k = 1; k < orders.size(); ++k) CHECK(mean_gap[k] < mean_gap[k - 1]);
    }

    TEST_CASE("layer gradients")
    {
        const OperatorPtr op = graph_op(grid_graph(3, 3));
        Rng rng(6);
        {
            Param<double> w("W", random_real(rng, 3, 2));
            Param<double> b("b", random_real(rng, 1, 2));
            const RealMatrix x = random_real(rng, 9, 3);
            const RealMatrix y = random_real(rng, 9, 2);
            const auto r = grad_check<double>(
                [&](Tape<double>& t) { return t.mse(affine(t, t.constant(x), w, b), t.constant(y)); }, {&w, &b});
            CHECK(r.max_relative_error < 1e-7);
        }
        {
            Param<Complex> s("S", generator<Complex>(rng, 3));
            const ComplexMatrix x = random_complex(rng, 9, 3);
            const ComplexMatrix y = random_complex(rng, 9, 3);
            const auto r = grad_check<Complex>(
                [&](Tape<Complex>& t) { return t.mse(lie_uni_conv(t, t.constant(x), op, s, 10), t.constant(y)); },
                {&s});
            CHECK(r.max_relative_error < 1e-4);
        }
        {
            Param<Complex> tp("t", ComplexMatrix::Constant(1, 1, Complex(0.6, 0.0)), true);
            Param<Complex> s("S", generator<Complex>(rng, 2));
            const ComplexMatrix x = random_complex(rng, 9, 2);
            const ComplexMatrix y = random_complex(rng, 9, 2);
            const auto r = grad_check<Complex>(
                [&](Tape<Complex>& t) { return t.mse(sep_uni_conv(t, t.constant(x), op, tp, s), t.constant(y)); },
                {&tp, &s});
            CHECK(r.max_relative_error < 1e-4);
            CHECK(tp.grad(0, 0).imag() == 0.0);
        }
    }

    TEST_CASE("activation names")
    {
        CHECK(activation_from_string("relu") == Activation::relu);
        CHECK(to_string(Activation::sin) == "sin");
        CHECK(error_kind_of([] { (void)activation_from_string("tanh"); }) == ErrorKind::config);
    }
}
