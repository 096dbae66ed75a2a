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

#include <smoothdyn/graph.hpp>
#include <smoothdyn/mesh.hpp>

#include <string>
#include <vector>

namespace smoothdyn {

/// Time-indexed sequence of n x d real frames.
struct Trajectory
{
    std::string domain_id;
    std::vector<double> times;
    std::vector<RealMatrix> frames;
    /// Set by rollout when a non-finite prediction stopped it early.
    bool truncated = false;

    std::size_t size() const { return frames.size(); }
    Eigen::Index nodes() const { return frames.empty() ? 0 : frames.front().rows(); }
    Eigen::Index channels() const { return frames.empty() ? 0 : frames.front().cols(); }

    /// Equal frame shapes, times nonnegative and strictly increasing.
    void validate() const;
};

enum class PdeKind { heat_graph, heat_mesh, wave_mesh, cahn_hilliard };

std::string_view to_string(PdeKind kind);
PdeKind pde_kind_from_string(std::string_view name);

struct PdeParams
{
    PdeKind kind = PdeKind::heat_mesh;
    double tau = 1.0;
    double alpha = 1.0;
    double c = 1.0;
    double mobility = 1.0;
    double lambda = 1e-2;
    double dt = 1e-2;
    int steps = 100;

    void validate() const;
};

/// Frame k = exp(-tau t_k L) H(0). Consecutive frames are advanced with a
/// cached propagator per distinct time increment.
Trajectory simulate_heat_graph(
    const Graph& g,
    const RealMatrix& h0,
    double tau,
    const std::vector<double>& times,
    LaplacianKind kind = LaplacianKind::normalized);

/// Same, with a precomputed Laplacian (dense n x n).
Trajectory simulate_heat_operator(
    const RealMatrix& laplacian,
    const RealMatrix& h0,
    double tau,
    const std::vector<double>& times);

/// Applies L_mesh = diag(A)^{-1} K to u; nonpositive spectrum.
RealMatrix apply_mesh_laplacian(const MeshOperators& ops, const RealMatrix& u);

/// Implicit Euler: (M - alpha dt K) u_{k+1} = M u_k. Frames 0..steps.
Trajectory simulate_heat_mesh(const MeshOperators& ops, const RealMatrix& u0, double alpha, double dt, int steps);

/// Largest stable dt for the explicit wave scheme from a Gershgorin bound on
/// the spectrum of L_mesh.
double wave_max_stable_dt(const MeshOperators& ops, double c);

/// Velocity Verlet (kick-drift-kick leapfrog). Frames 0..steps; the final
/// velocity is written to `final_velocity` when given.
Trajectory simulate_wave_mesh(
    const MeshOperators& ops,
    const RealMatrix& u0,
    const RealMatrix& v0,
    double c,
    double dt,
    int steps,
    RealMatrix* final_velocity = nullptr);

/// 1/2 v^T M v - 1/2 c^2 u^T K u.
double wave_energy(const MeshOperators& ops, const RealMatrix& u, const RealMatrix& v, double c);

/// f'(c) for f(c) = 100 c^2 (1 - c^2).
double cahn_hilliard_potential_derivative(double c);

/// Linear part implicit, nonlinear part explicit:
/// (M + dt mob lambda K M^{-1} K) c_{k+1} = M c_k + dt mob K f'(c_k).
Trajectory simulate_cahn_hilliard(
    const MeshOperators& ops,
    const RealMatrix& c0,
    double mobility,
    double lambda,
    double dt,
    int steps);

} // namespace smoothdyn
