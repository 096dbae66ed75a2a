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

#include <smoothdyn/dynamics.hpp>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace smoothdyn {

void Trajectory::validate() const
{
    require(times.size() == frames.size(), ErrorKind::dimension, "trajectory: times and frames differ in length");
    for (std::size_t k = 0; k < frames.size(); ++k) {
        require(
            frames[k].rows() == nodes() && frames[k].cols() == channels(),
            ErrorKind::dimension,
            "trajectory: frame " + std::to_string(k) + " has a different shape");
        require(times[k] >= 0.0, ErrorKind::argument, "trajectory: negative time");
        if (k > 0) {
            require(times[k] > times[k - 1], ErrorKind::argument, "trajectory: times must be strictly increasing");
        }
    }
}

std::string_view to_string(PdeKind kind)
{
    switch (kind) {
    case PdeKind::heat_graph: return "heat_graph";
    case PdeKind::heat_mesh: return "heat_mesh";
    case PdeKind::wave_mesh: return "wave_mesh";
    case PdeKind::cahn_hilliard: return "cahn_hilliard";
    }
    return "unknown";
}

PdeKind pde_kind_from_string(std::string_view name)
{
    if (name == "heat_graph") return PdeKind::heat_graph;
    if (name == "heat_mesh") return PdeKind::heat_mesh;
    if (name == "wave_mesh") return PdeKind::wave_mesh;
    if (name == "cahn_hilliard") return PdeKind::cahn_hilliard;
    fail(ErrorKind::config, "unknown pde kind '" + std::string(name) + "'");
}

void PdeParams::validate() const
{
    require(dt > 0.0, ErrorKind::argument, "pde: dt must be > 0");
    require(steps >= 1, ErrorKind::argument, "pde: steps must be >= 1");
    require(tau > 0.0 && alpha > 0.0 && c > 0.0 && mobility > 0.0 && lambda > 0.0,
        ErrorKind::argument,
        "pde: diffusivity, wave speed, mobility and lambda must be > 0");
}

namespace {

void check_times(const std::vector<double>& times)
{
    require(!times.empty(), ErrorKind::argument, "heat: empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k) {
        require(times[k] >= 0.0, ErrorKind::argument, "heat: negative time");
        if (k > 0) require(times[k] > times[k - 1], ErrorKind::argument, "heat: times must be strictly increasing");
    }
}

void check_state(const MeshOperators& ops, const RealMatrix& u, const char* what)
{
    require(
        u.rows() == ops.n,
        ErrorKind::dimension,
        std::string(what) + ": state has " + std::to_string(u.rows()) + " rows, mesh has " +
            std::to_string(ops.n) + " vertices");
    require(all_finite(u), ErrorKind::numerical, std::string(what) + ": non-finite initial state");
}

SparseOperator mass_matrix(const MeshOperators& ops)
{
    SparseOperator m(ops.n, ops.n);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < ops.n; ++i) t.emplace_back(i, i, ops.areas[static_cast<std::size_t>(i)]);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Eigen::VectorXd area_vector(const MeshOperators& ops)
{
    return Eigen::Map<const Eigen::VectorXd>(ops.areas.data(), ops.n);
}

} // namespace

Trajectory simulate_heat_operator(
    const RealMatrix& laplacian,
    const RealMatrix& h0,
    double tau,
    const std::vector<double>& times)
{
    require(
        laplacian.rows() == laplacian.cols() && laplacian.rows() == h0.rows(),
        ErrorKind::dimension,
        "heat: Laplacian and initial state disagree in size");
    require(tau > 0.0, ErrorKind::argument, "heat: tau must be > 0");
    require(all_finite(h0), ErrorKind::numerical, "heat: non-finite initial state");
    check_times(times);

    Trajectory traj;
    traj.times = times;
    traj.frames.reserve(times.size());
    std::map<double, RealMatrix> propagators;
    auto propagator = [&](double dt) -> const RealMatrix& {
        auto it = propagators.find(dt);
        if (it == propagators.end()) {
            it = propagators.emplace(dt, mat_exp_reference(RealMatrix(-tau * dt * laplacian))).first;
        }
        return it->second;
    };

    RealMatrix h = times[0] == 0.0 ? h0 : RealMatrix(propagator(times[0]) * h0);
    traj.frames.push_back(h);
    for (std::size_t k = 1; k < times.size(); ++k) {
        h = propagator(times[k] - times[k - 1]) * h;
        traj.frames.push_back(h);
    }
    return traj;
}

Trajectory simulate_heat_graph(
    const Graph& g,
    const RealMatrix& h0,
    double tau,
    const std::vector<double>& times,
    LaplacianKind kind)
{
    Trajectory traj = simulate_heat_operator(laplacian(g, kind), h0, tau, times);
    traj.domain_id = "graph";
    return traj;
}

RealMatrix apply_mesh_laplacian(const MeshOperators& ops, const RealMatrix& u)
{
    RealMatrix ku = ops.stiffness * u;
    for (int i = 0; i < ops.n; ++i) ku.row(i) /= ops.areas[static_cast<std::size_t>(i)];
    return ku;
}

Trajectory simulate_heat_mesh(const MeshOperators& ops, const RealMatrix& u0, double alpha, double dt, int steps)
{
    check_state(ops, u0, "heat_mesh");
    require(alpha > 0.0 && dt > 0.0 && steps >= 1, ErrorKind::argument, "heat_mesh: need alpha > 0, dt > 0, steps >= 1");
    const SparseOperator m = mass_matrix(ops);
    const SparseOperator system = m - (alpha * dt) * ops.stiffness;
    Eigen::SimplicialLDLT<SparseOperator> solver(system);
    require(solver.info() == Eigen::Success, ErrorKind::numerical, "heat_mesh: factorization failed");

    Trajectory traj;
    traj.domain_id = "mesh";
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.frames.reserve(static_cast<std::size_t>(steps) + 1);
    RealMatrix u = u0;
    traj.times.push_back(0.0);
    traj.frames.push_back(u);
    for (int k = 1; k <= steps; ++k) {
        const RealMatrix rhs = m * u;
        u = solver.solve(rhs);
        require(solver.info() == Eigen::Success && all_finite(u), ErrorKind::numerical, "heat_mesh: solve failed at step " + std::to_string(k));
        traj.times.push_back(k * dt);
        traj.frames.push_back(u);
    }
    return traj;
}

double wave_max_stable_dt(const MeshOperators& ops, double c)
{
    // Gershgorin on diag(A)^{-1} K: |K_ii| / A_i + sum_j |K_ij| / A_i.
    std::vector<double> radius(static_cast<std::size_t>(ops.n), 0.0);
    for (const auto& e : ops.cot_weights.entries()) {
        radius[static_cast<std::size_t>(e.i)] += std::abs(e.value);
        radius[static_cast<std::size_t>(e.j)] += std::abs(e.value);
    }
    double lambda_max = 0.0;
    for (int i = 0; i < ops.n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        lambda_max = std::max(lambda_max, (std::abs(ops.cot_weights.diagonal()[iu]) + radius[iu]) / ops.areas[iu]);
    }
    if (lambda_max == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / (c * std::sqrt(lambda_max));
}

Trajectory simulate_wave_mesh(
    const MeshOperators& ops,
    const RealMatrix& u0,
    const RealMatrix& v0,
    double c,
    double dt,
    int steps,
    RealMatrix* final_velocity)
{
    check_state(ops, u0, "wave_mesh");
    check_state(ops, v0, "wave_mesh");
    require(u0.cols() == v0.cols(), ErrorKind::dimension, "wave_mesh: u0 and v0 differ in width");
    require(c > 0.0 && dt > 0.0 && steps >= 1, ErrorKind::argument, "wave_mesh: need c > 0, dt > 0, steps >= 1");
    const double dt_max = wave_max_stable_dt(ops, c);
    if (!(dt < dt_max)) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "wave_mesh: dt = " << dt << " violates the CFL bound; max admissible dt = " << dt_max;
        fail(ErrorKind::numerical, msg.str());
    }

    const double c2 = c * c;
    Trajectory traj;
    traj.domain_id = "mesh";
    RealMatrix u = u0;
    RealMatrix v = v0;
    RealMatrix acc = c2 * apply_mesh_laplacian(ops, u);
    traj.times.push_back(0.0);
    traj.frames.push_back(u);
    for (int k = 1; k <= steps; ++k) {
        v += 0.5 * dt * acc;
        u += dt * v;
        acc = c2 * apply_mesh_laplacian(ops, u);
        v += 0.5 * dt * acc;
        traj.times.push_back(k * dt);
        traj.frames.push_back(u);
    }
    if (final_velocity != nullptr) *final_velocity = v;
    return traj;
}

double wave_energy(const MeshOperators& ops, const RealMatrix& u, const RealMatrix& v, double c)
{
    const Eigen::VectorXd a = area_vector(ops);
    const double kinetic = 0.5 * (v.array().square().colwise() * a.array()).sum();
    const double potential = -0.5 * c * c * u.cwiseProduct(ops.stiffness * u).sum();
    return kinetic + potential;
}

double cahn_hilliard_potential_derivative(double c)
{
    return 200.0 * c - 400.0 * c * c * c;
}

Trajectory simulate_cahn_hilliard(
    const MeshOperators& ops,
    const RealMatrix& c0,
    double mobility,
    double lambda,
    double dt,
    int steps)
{
    check_state(ops, c0, "cahn_hilliard");
    require(
        mobility > 0.0 && lambda > 0.0 && dt > 0.0 && steps >= 1,
        ErrorKind::argument,
        "cahn_hilliard: need mobility > 0, lambda > 0, dt > 0, steps >= 1");
    const SparseOperator m = mass_matrix(ops);
    SparseOperator m_inv_k = ops.stiffness;
    for (int col = 0; col < m_inv_k.outerSize(); ++col) {
        for (SparseOperator::InnerIterator it(m_inv_k, col); it; ++it) {
            it.valueRef() /= ops.areas[static_cast<std::size_t>(it.row())];
        }
    }
    const SparseOperator bilaplacian = ops.stiffness * m_inv_k;
    SparseOperator system = m + (dt * mobility * lambda) * bilaplacian;
    // K M^{-1} K is symmetric in exact arithmetic; symmetrize the roundoff.
    system = 0.5 * (system + SparseOperator(system.transpose()));
    Eigen::SimplicialLDLT<SparseOperator> solver(system);
    require(solver.info() == Eigen::Success, ErrorKind::numerical, "cahn_hilliard: factorization failed");

    Trajectory traj;
    traj.domain_id = "mesh";
    RealMatrix c = c0;
    traj.times.push_back(0.0);
    traj.frames.push_back(c);
    for (int k = 1; k <= steps; ++k) {
        const RealMatrix fprime = c.unaryExpr(&cahn_hilliard_potential_derivative);
        const RealMatrix rhs = m * c + (dt * mobility) * (ops.stiffness * fprime);
        c = solver.solve(rhs);
        if (solver.info() != Eigen::Success || !all_finite(c)) {
            fail(ErrorKind::numerical, "cahn_hilliard: solve failed or diverged at step " + std::to_string(k));
        }
        traj.times.push_back(k * dt);
        traj.frames.push_back(c);
    }
    return traj;
}

} // namespace smoothdyn
