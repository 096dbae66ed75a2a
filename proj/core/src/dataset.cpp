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

#include <smoothdyn/dataset.hpp>
#include <smoothdyn/rng.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace smoothdyn {

void HeatGridConfig::validate() const
{
    require(count >= 1, ErrorKind::argument, "heat grid: count must be >= 1");
    require(sources >= 1, ErrorKind::argument, "heat grid: sources must be >= 1");
    require(side_min >= 1 && side_std >= 0.0 && side_mean > 0.0, ErrorKind::argument, "heat grid: bad side distribution");
    require(tau > 0.0 && dt > 0.0 && t_end >= dt, ErrorKind::argument, "heat grid: need tau > 0, 0 < dt <= t_end");
    require(
        input_time >= 0.0 && target_time > input_time && target_time <= t_end,
        ErrorKind::argument,
        "heat grid: need 0 <= input_time < target_time <= t_end");
    for (double t : {input_time, target_time}) {
        const double k = t / dt;
        require(std::abs(k - std::round(k)) < 1e-9, ErrorKind::argument, "heat grid: pair times must lie on the dt grid");
    }
}

namespace {

int draw_side(Rng& rng, const HeatGridConfig& cfg)
{
    std::normal_distribution<double> normal(cfg.side_mean, cfg.side_std);
    return std::max(cfg.side_min, static_cast<int>(std::lround(normal(rng))));
}

} // namespace

std::vector<HeatGridSample> gen_heat_grid_dataset(const HeatGridConfig& cfg)
{
    cfg.validate();
    const int steps = static_cast<int>(std::lround(cfg.t_end / cfg.dt));
    const auto input_index = static_cast<std::size_t>(std::lround(cfg.input_time / cfg.dt));
    const auto target_index = static_cast<std::size_t>(std::lround(cfg.target_time / cfg.dt));
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) times[static_cast<std::size_t>(k)] = k * cfg.dt;

    std::vector<HeatGridSample> out(static_cast<std::size_t>(cfg.count));
    // One propagator exp(-tau dt L) per grid shape, shared by all threads.
    std::map<std::pair<int, int>, std::shared_ptr<const RealMatrix>> propagators;
    std::mutex propagator_mutex;
    auto propagator = [&](int rows, int cols) {
        {
            std::lock_guard lock(propagator_mutex);
            const auto it = propagators.find({rows, cols});
            if (it != propagators.end()) return it->second;
        }
        const RealMatrix l = laplacian(grid_graph(rows, cols), cfg.laplacian);
        auto p = std::make_shared<const RealMatrix>(mat_exp_reference(RealMatrix(-cfg.tau * cfg.dt * l)));
        std::lock_guard lock(propagator_mutex);
        return propagators.emplace(std::pair{rows, cols}, std::move(p)).first->second;
    };

    auto make_sample = [&](std::size_t index) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)));
        HeatGridSample s;
        s.rows = draw_side(rng, cfg);
        s.cols = draw_side(rng, cfg);
        const int n = s.rows * s.cols;
        require(
            cfg.sources <= n,
            ErrorKind::argument,
            "heat grid: " + std::to_string(cfg.sources) + " sources do not fit on a " +
                std::to_string(s.rows) + "x" + std::to_string(s.cols) + " grid");
        // Partial Fisher-Yates: the first `sources` entries are distinct nodes.
        std::vector<int> nodes(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) nodes[static_cast<std::size_t>(v)] = v;
        RealMatrix h = RealMatrix::Zero(n, 1);
        for (int k = 0; k < cfg.sources; ++k) {
            std::uniform_int_distribution<int> pick(k, n - 1);
            std::swap(nodes[static_cast<std::size_t>(k)], nodes[static_cast<std::size_t>(pick(rng))]);
            h(nodes[static_cast<std::size_t>(k)], 0) = 1.0;
        }

        const auto p = propagator(s.rows, s.cols);
        Trajectory traj;
        traj.domain_id = "grid:" + std::to_string(s.rows) + "x" + std::to_string(s.cols);
        traj.times = times;
        traj.frames.reserve(times.size());
        traj.frames.push_back(h);
        for (int k = 1; k <= steps; ++k) {
            h = (*p) * h;
            traj.frames.push_back(h);
        }
        s.input = traj.frames[input_index];
        s.target = traj.frames[target_index];
        if (cfg.keep_trajectories) s.trajectory = std::move(traj);
        out[index] = std::move(s);
    };

    unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < out.size(); ++i) make_sample(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next++; i < out.size(); i = next++) make_sample(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = out.size();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

RealMatrix mesh_initial_condition(const TriMesh& mesh, PdeKind kind, std::uint64_t seed)
{
    const int n = mesh.vertex_count();
    require(n >= 1, ErrorKind::argument, "initial condition: empty mesh");
    Rng rng(derive_seed(seed, "mesh_initial_condition"));
    RealMatrix u = RealMatrix::Zero(n, 1);
    if (kind == PdeKind::cahn_hilliard) {
        std::uniform_real_distribution<double> band(0.45, 0.55);
        for (int v = 0; v < n; ++v) u(v, 0) = band(rng);
        return u;
    }
    const RealMatrix& p = mesh.positions();
    const Eigen::RowVector3d lo = p.colwise().minCoeff();
    const Eigen::RowVector3d hi = p.colwise().maxCoeff();
    const double extent = (hi - lo).norm();
    std::uniform_int_distribution<int> vertex(0, n - 1);
    std::uniform_real_distribution<double> amplitude(0.5, 1.0);
    std::uniform_real_distribution<double> width(0.1, 0.25);
    constexpr int k_bumps = 4;
    for (int b = 0; b < k_bumps; ++b) {
        const Eigen::RowVector3d centre = p.row(vertex(rng));
        const double a = amplitude(rng);
        const double s = width(rng) * extent;
        for (int v = 0; v < n; ++v) {
            u(v, 0) += a * std::exp(-(p.row(v) - centre).squaredNorm() / (2.0 * s * s));
        }
    }
    return u;
}

Trajectory simulate_mesh_pde(const MeshOperators& ops, const RealMatrix& u0, const PdeParams& params)
{
    params.validate();
    switch (params.kind) {
    case PdeKind::heat_mesh: return simulate_heat_mesh(ops, u0, params.alpha, params.dt, params.steps);
    case PdeKind::wave_mesh:
        return simulate_wave_mesh(ops, u0, RealMatrix::Zero(u0.rows(), u0.cols()), params.c, params.dt, params.steps);
    case PdeKind::cahn_hilliard:
        return simulate_cahn_hilliard(ops, u0, params.mobility, params.lambda, params.dt, params.steps);
    case PdeKind::heat_graph: break;
    }
    fail(ErrorKind::config, "simulate_mesh_pde: heat_graph is not a mesh PDE");
}

std::vector<SequenceSample> heat_grid_sequences(const std::vector<HeatGridSample>& samples)
{
    std::map<std::pair<int, int>, std::shared_ptr<const SparseOperator>> cache;
    std::vector<SequenceSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto& op = cache[{s.rows, s.cols}];
        if (!op) op = std::make_shared<const SparseOperator>(normalized_adjacency_sparse(grid_graph(s.rows, s.cols)));
        out.push_back({op, {s.input, s.target}});
    }
    return out;
}

std::vector<Trajectory> gen_mesh_trajectories(
    const TriMesh& mesh,
    const MeshOperators& ops,
    const PdeParams& params,
    int count,
    std::uint64_t seed)
{
    require(count >= 1, ErrorKind::argument, "gen_mesh_trajectories: count must be >= 1");
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const RealMatrix u0 = mesh_initial_condition(mesh, params.kind, derive_seed(seed, static_cast<std::uint64_t>(k)));
        out.push_back(simulate_mesh_pde(ops, u0, params));
    }
    return out;
}

} // namespace smoothdyn
