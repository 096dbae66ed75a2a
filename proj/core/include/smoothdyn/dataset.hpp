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

#include <smoothdyn/dynamics.hpp>
#include <smoothdyn/mesh.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace smoothdyn {

/// Random heat diffusion on grid graphs. Side lengths are drawn independently
/// as round(N(side_mean, side_std)) clamped below by side_min, so grids have
/// about side_mean^2 nodes.
struct HeatGridConfig
{
    int count = 10000;
    int sources = 20;
    std::uint64_t seed = 0;
    double side_mean = 10.0;
    double side_std = 2.0;
    int side_min = 5;
    double tau = 1.0;
    double t_end = 10.0;
    double dt = 0.5;
    double input_time = 3.0;
    double target_time = 4.0;
    LaplacianKind laplacian = LaplacianKind::normalized;
    bool keep_trajectories = false;
    /// 0 means std::thread::hardware_concurrency().
    int threads = 0;

    void validate() const;
};

struct HeatGridSample
{
    int rows = 0;
    int cols = 0;
    RealMatrix input;  // n x 1 at input_time
    RealMatrix target; // n x 1 at target_time
    /// Full 0..t_end trajectory when keep_trajectories is set.
    std::optional<Trajectory> trajectory;
};

/// Sample i depends only on (seed, i): output is identical for any thread count.
std::vector<HeatGridSample> gen_heat_grid_dataset(const HeatGridConfig& cfg);

/// Random initial state for a mesh PDE: a sum of Gaussian bumps (heat, wave)
/// or a uniform band around 0.5 (Cahn-Hilliard).
RealMatrix mesh_initial_condition(const TriMesh& mesh, PdeKind kind, std::uint64_t seed);

/// Runs the selected mesh simulator (heat_mesh, wave_mesh, cahn_hilliard).
Trajectory simulate_mesh_pde(const MeshOperators& ops, const RealMatrix& u0, const PdeParams& params);

/// A training sequence: the operator it lives on plus its frames.
struct SequenceSample
{
    std::shared_ptr<const SparseOperator> op;
    std::vector<RealMatrix> frames;
};

/// One (input, target) sequence per sample on its grid's normalized adjacency.
/// Grids of equal shape share one operator.
std::vector<SequenceSample> heat_grid_sequences(const std::vector<HeatGridSample>& samples);

/// `count` trajectories of `params` on one mesh; trajectory k starts from
/// mesh_initial_condition(mesh, params.kind, derive_seed(seed, k)).
std::vector<Trajectory> gen_mesh_trajectories(
    const TriMesh& mesh,
    const MeshOperators& ops,
    const PdeParams& params,
    int count,
    std::uint64_t seed);

} // namespace smoothdyn
