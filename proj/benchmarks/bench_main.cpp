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

#include <smoothdyn/graph.hpp>
#include <smoothdyn/layers.hpp>
#include <smoothdyn/linalg.hpp>
#include <smoothdyn/mesh.hpp>
#include <smoothdyn/metrics.hpp>
#include <smoothdyn/model.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/shapes.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace smoothdyn;

namespace {

RealMatrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0)
{
    std::normal_distribution<double> n(0.0, stddev);
    RealMatrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
    return m;
}

void BM_LieUniConvForward(benchmark::State& state)
{
    const int side = static_cast<int>(state.range(0));
    const int t_max = static_cast<int>(state.range(1));
    const auto op = std::make_shared<const SparseOperator>(normalized_adjacency_sparse(grid_graph(side, side)));
    Rng rng(1);
    const RealMatrix x = gaussian(rng, side * side, 16);
    Param<double> s("S", gaussian(rng, 16, 16, 0.18));
    for (auto _ : state) {
        Tape<double> tape;
        benchmark::DoNotOptimize(tape.value(lie_uni_conv(tape, tape.constant(x), op, s, t_max)).data());
    }
}
BENCHMARK(BM_LieUniConvForward)->Args({10, 3})->Args({10, 10})->Args({32, 10});

void BM_RUniGraphStep(benchmark::State& state)
{
    const auto op = std::make_shared<const SparseOperator>(normalized_adjacency_sparse(grid_graph(10, 10)));
    Model<double> m(r_unigraph_spec(1, 16, 4, 3, 1, 2));
    Rng rng(2);
    const RealMatrix x = gaussian(rng, 100, 1);
    const RealMatrix y = gaussian(rng, 100, 1);
    for (auto _ : state) {
        Tape<double> tape;
        const NodeId loss = tape.mse(m.forward(tape, tape.constant(x), op), tape.constant(y));
        tape.backward(loss);
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_RUniGraphStep);

void BM_MatrixExp(benchmark::State& state)
{
    const auto d = static_cast<Eigen::Index>(state.range(0));
    Rng rng(3);
    const RealMatrix s = gaussian(rng, d, d, 0.3);
    const RealMatrix w = s - s.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(mat_exp_reference(w).data());
}
BENCHMARK(BM_MatrixExp)->Arg(8)->Arg(32);

void BM_MeshOperatorsRewire(benchmark::State& state)
{
    const TriMesh mesh = perturbed_icosphere(static_cast<int>(state.range(0)), 0.3, 4);
    for (auto _ : state) benchmark::DoNotOptimize(mesh_operators(mesh, true).flips);
}
BENCHMARK(BM_MeshOperatorsRewire)->Arg(2)->Arg(3);

void BM_TwoPointCorrelation(benchmark::State& state)
{
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Rng rng(5);
    const RealMatrix pos = gaussian(rng, n, 3);
    const RealMatrix vals = gaussian(rng, n, 1);
    const std::vector<double> edges{0.0, 0.25, 0.5, 1.0, 2.0};
    for (auto _ : state) benchmark::DoNotOptimize(two_point_correlation(pos, vals, edges).xi.data());
}
BENCHMARK(BM_TwoPointCorrelation)->Arg(200)->Arg(2000);

} // namespace

BENCHMARK_MAIN();
