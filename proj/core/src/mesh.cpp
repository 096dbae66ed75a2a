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

#include <smoothdyn/mesh.hpp>
#include <smoothdyn/graph.hpp>

#include <Eigen/Geometry>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <set>

namespace smoothdyn {

namespace {

std::string face_name(std::size_t f, const Face& face)
{
    return "face " + std::to_string(f) + " (" + std::to_string(face[0]) + ", " +
        std::to_string(face[1]) + ", " + std::to_string(face[2]) + ")";
}

std::string edge_name(const EdgeKey& e)
{
    return "(" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")";
}

std::map<EdgeKey, std::vector<int>> edge_faces(const std::vector<Face>& faces)
{
    std::map<EdgeKey, std::vector<int>> out;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int c = 0; c < 3; ++c) {
            out[edge_key(faces[f][c], faces[f][(c + 1) % 3])].push_back(static_cast<int>(f));
        }
    }
    return out;
}

/// Interior angle opposite side a.
double opposite_angle(double a, double b, double c)
{
    const double area = triangle_area(a, b, c);
    return std::atan2(4.0 * area, b * b + c * c - a * a);
}

int third_vertex(const Face& f, int a, int b)
{
    for (int v : f) {
        if (v != a && v != b) return v;
    }
    return -1;
}

/// True if the face traverses a -> b in its cyclic order.
bool has_directed_edge(const Face& f, int a, int b)
{
    for (int c = 0; c < 3; ++c) {
        if (f[c] == a && f[(c + 1) % 3] == b) return true;
    }
    return false;
}

} // namespace

TriMesh::TriMesh(RealMatrix positions, std::vector<Face> faces)
    : m_positions(std::move(positions))
    , m_faces(std::move(faces))
{
    require(
        m_positions.cols() == 3,
        ErrorKind::dimension,
        "mesh: positions must be n x 3, got " + std::to_string(m_positions.cols()) + " columns");
    const int n = vertex_count();
    std::set<EdgeKey> edges;
    for (std::size_t f = 0; f < m_faces.size(); ++f) {
        const Face& face = m_faces[f];
        for (int v : face) {
            require(
                v >= 0 && v < n,
                ErrorKind::geometry,
                "mesh: " + face_name(f, face) + " references a vertex outside [0, " +
                    std::to_string(n) + ")");
        }
        require(
            face[0] != face[1] && face[1] != face[2] && face[0] != face[2],
            ErrorKind::geometry,
            "mesh: degenerate " + face_name(f, face) + " repeats a vertex");
        for (int c = 0; c < 3; ++c) edges.insert(edge_key(face[c], face[(c + 1) % 3]));
    }
    m_edges.assign(edges.begin(), edges.end());
}

double TriMesh::surface_area() const
{
    double total = 0.0;
    for (const Face& f : m_faces) {
        const Eigen::Vector3d a = m_positions.row(f[0]).transpose();
        const Eigen::Vector3d b = m_positions.row(f[1]).transpose();
        const Eigen::Vector3d c = m_positions.row(f[2]).transpose();
        total += 0.5 * (b - a).cross(c - a).norm();
    }
    return total;
}

ManifoldReport check_manifold(int vertex_count, const std::vector<Face>& faces)
{
    ManifoldReport report;
    const auto ef = edge_faces(faces);
    for (const auto& [e, fs] : ef) {
        if (fs.size() == 1) ++report.boundary_edges;
        if (fs.size() > 2) report.edges.push_back({e, static_cast<int>(fs.size())});
    }

    // The link of each vertex (opposite edges of its incident faces) must be a
    // single path or a single cycle.
    std::vector<std::vector<EdgeKey>> link(static_cast<std::size_t>(vertex_count));
    for (const Face& f : faces) {
        for (int c = 0; c < 3; ++c) {
            link[static_cast<std::size_t>(f[c])].push_back(edge_key(f[(c + 1) % 3], f[(c + 2) % 3]));
        }
    }
    for (int v = 0; v < vertex_count; ++v) {
        const auto& edges = link[static_cast<std::size_t>(v)];
        if (edges.empty()) {
            report.vertices.push_back({v, "vertex is not referenced by any face"});
            continue;
        }
        std::map<int, std::vector<int>> adj;
        for (const auto& [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        bool branching = false;
        for (const auto& [_, nb] : adj) branching = branching || nb.size() > 2;
        std::set<int> seen;
        std::deque<int> queue{adj.begin()->first};
        seen.insert(adj.begin()->first);
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int w : adj[u]) {
                if (seen.insert(w).second) queue.push_back(w);
            }
        }
        if (branching) {
            report.vertices.push_back({v, "incident faces branch (link vertex of degree > 2)"});
        } else if (seen.size() != adj.size()) {
            report.vertices.push_back({v, "incident faces form more than one fan"});
        }
    }
    return report;
}

ManifoldReport check_manifold(const TriMesh& mesh)
{
    return check_manifold(mesh.vertex_count(), mesh.faces());
}

double triangle_area(double a, double b, double c)
{
    // Sort descending: a >= b >= c.
    if (a < b) std::swap(a, b);
    if (a < c) std::swap(a, c);
    if (b < c) std::swap(b, c);
    const double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    return p <= 0.0 ? 0.0 : 0.25 * std::sqrt(p);
}

IntrinsicMesh::IntrinsicMesh(int vertex_count, std::vector<Face> faces, std::map<EdgeKey, double> lengths, Origin origin)
    : m_n(vertex_count)
    , m_faces(std::move(faces))
    , m_lengths(std::move(lengths))
    , m_origin(origin)
{
    for (std::size_t f = 0; f < m_faces.size(); ++f) {
        const Face& face = m_faces[f];
        double l[3];
        for (int c = 0; c < 3; ++c) {
            const int a = face[c];
            const int b = face[(c + 1) % 3];
            if (a < 0 || a >= m_n || a == b) fail(ErrorKind::geometry, "intrinsic mesh: invalid " + face_name(f, face));
            const auto it = m_lengths.find(edge_key(a, b));
            if (it == m_lengths.end()) {
                fail(ErrorKind::geometry, "intrinsic mesh: missing length for edge " + edge_name(edge_key(a, b)));
            }
            l[c] = it->second;
        }
        if (!(l[0] > 0.0 && l[1] > 0.0 && l[2] > 0.0 && l[0] < l[1] + l[2] && l[1] < l[0] + l[2] &&
              l[2] < l[0] + l[1])) {
            fail(ErrorKind::geometry, "intrinsic mesh: " + face_name(f, face) + " violates the strict triangle inequality");
        }
    }
}

IntrinsicMesh IntrinsicMesh::from_embedded(const TriMesh& mesh)
{
    std::map<EdgeKey, double> lengths;
    const RealMatrix& p = mesh.positions();
    for (const EdgeKey& e : mesh.edges()) {
        lengths[e] = (p.row(e.first) - p.row(e.second)).norm();
    }
    return IntrinsicMesh(mesh.vertex_count(), mesh.faces(), std::move(lengths), Origin::embedded);
}

double IntrinsicMesh::length(int a, int b) const
{
    const auto it = m_lengths.find(edge_key(a, b));
    if (it == m_lengths.end()) fail(ErrorKind::argument, "intrinsic mesh: no edge " + edge_name(edge_key(a, b)));
    return it->second;
}

int IntrinsicMesh::euler_characteristic() const
{
    return m_n - static_cast<int>(m_lengths.size()) + static_cast<int>(m_faces.size());
}

double IntrinsicMesh::face_area(std::size_t f) const
{
    const Face& face = m_faces.at(f);
    return triangle_area(length(face[0], face[1]), length(face[1], face[2]), length(face[2], face[0]));
}

double IntrinsicMesh::surface_area() const
{
    double total = 0.0;
    for (std::size_t f = 0; f < m_faces.size(); ++f) total += face_area(f);
    return total;
}

SparseSym cotangent_weights(const IntrinsicMesh& mesh)
{
    std::map<EdgeKey, double> w;
    for (const auto& [e, _] : mesh.lengths()) w[e] = 0.0;
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const Face& face = mesh.faces()[f];
        // Side c is opposite corner c.
        double side[3];
        for (int c = 0; c < 3; ++c) side[c] = mesh.length(face[(c + 1) % 3], face[(c + 2) % 3]);
        const double area = triangle_area(side[0], side[1], side[2]);
        const double scale = side[0] * side[0] + side[1] * side[1] + side[2] * side[2];
        if (!(area > 1e-14 * scale)) {
            fail(ErrorKind::geometry, "cotangent weights: degenerate " + face_name(f, face) + " (angle 0 or pi)");
        }
        for (int c = 0; c < 3; ++c) {
            const double a = side[c];
            const double b = side[(c + 1) % 3];
            const double d = side[(c + 2) % 3];
            const double cot = (b * b + d * d - a * a) / (4.0 * area);
            w[edge_key(face[(c + 1) % 3], face[(c + 2) % 3])] += 0.5 * cot;
        }
    }
    std::vector<SparseSym::Entry> entries;
    entries.reserve(w.size());
    std::vector<double> diagonal(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
    for (const auto& [e, value] : w) {
        entries.push_back({e.first, e.second, value});
        diagonal[static_cast<std::size_t>(e.first)] -= value;
        diagonal[static_cast<std::size_t>(e.second)] -= value;
    }
    return SparseSym(mesh.vertex_count(), std::move(entries), std::move(diagonal));
}

SparseSym cotangent_weights(const TriMesh& mesh)
{
    return cotangent_weights(IntrinsicMesh::from_embedded(mesh));
}

std::vector<double> barycentric_areas(const IntrinsicMesh& mesh)
{
    std::vector<double> areas(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const double a = mesh.face_area(f);
        require(a > 0.0, ErrorKind::geometry, "barycentric areas: zero-area " + face_name(f, mesh.faces()[f]));
        for (int v : mesh.faces()[f]) areas[static_cast<std::size_t>(v)] += a / 3.0;
    }
    return areas;
}

std::vector<double> barycentric_areas(const TriMesh& mesh)
{
    std::vector<double> areas(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
    const RealMatrix& p = mesh.positions();
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const Face& face = mesh.faces()[f];
        const Eigen::Vector3d a = p.row(face[0]).transpose();
        const Eigen::Vector3d b = p.row(face[1]).transpose();
        const Eigen::Vector3d c = p.row(face[2]).transpose();
        const double area = 0.5 * (b - a).cross(c - a).norm();
        require(area > 0.0, ErrorKind::geometry, "barycentric areas: zero-area " + face_name(f, face));
        for (int v : face) areas[static_cast<std::size_t>(v)] += area / 3.0;
    }
    return areas;
}

namespace {

/// Sum of the two angles opposite an interior edge; negative for boundary.
double opposite_angle_sum(const IntrinsicMesh& mesh, const EdgeKey& e, const std::vector<int>& fs)
{
    if (fs.size() != 2) return -1.0;
    double sum = 0.0;
    const double lij = mesh.length(e.first, e.second);
    for (int f : fs) {
        const int k = third_vertex(mesh.faces()[static_cast<std::size_t>(f)], e.first, e.second);
        sum += opposite_angle(lij, mesh.length(e.first, k), mesh.length(e.second, k));
    }
    return sum;
}

} // namespace

std::vector<EdgeKey> delaunay_violations(const IntrinsicMesh& mesh, double tol)
{
    std::vector<EdgeKey> out;
    for (const auto& [e, fs] : edge_faces(mesh.faces())) {
        if (opposite_angle_sum(mesh, e, fs) > std::numbers::pi + tol) out.push_back(e);
    }
    return out;
}

IntrinsicMesh intrinsic_delaunay_flip(const IntrinsicMesh& mesh, FlipStats* stats)
{
    constexpr double tol = 1e-10;
    std::vector<Face> faces = mesh.faces();
    std::map<EdgeKey, double> lengths = mesh.lengths();
    auto ef = edge_faces(faces);
    for (const auto& [e, fs] : ef) {
        require(
            fs.size() <= 2,
            ErrorKind::rewiring,
            "delaunay flip: edge " + edge_name(e) + " is not manifold");
    }
    auto len = [&](int a, int b) { return lengths.at(edge_key(a, b)); };

    std::deque<EdgeKey> queue;
    std::set<EdgeKey> queued;
    for (const auto& [e, fs] : ef) {
        if (fs.size() == 2) {
            queue.push_back(e);
            queued.insert(e);
        }
    }

    const int cap = 10 * static_cast<int>(lengths.size());
    int flips = 0;
    while (!queue.empty()) {
        const EdgeKey e = queue.front();
        queue.pop_front();
        queued.erase(e);
        const auto it = ef.find(e);
        if (it == ef.end() || it->second.size() != 2) continue;

        const int f1 = it->second[0];
        const int f2 = it->second[1];
        int i = e.first;
        int j = e.second;
        if (!has_directed_edge(faces[static_cast<std::size_t>(f1)], i, j)) std::swap(i, j);
        const int k = third_vertex(faces[static_cast<std::size_t>(f1)], i, j);
        const int l = third_vertex(faces[static_cast<std::size_t>(f2)], i, j);

        const double lij = len(i, j);
        const double alpha = opposite_angle(lij, len(i, k), len(j, k));
        const double beta = opposite_angle(lij, len(i, l), len(j, l));
        if (alpha + beta <= std::numbers::pi + tol) continue;

        if (k == l || lengths.count(edge_key(k, l)) != 0) {
            fail(
                ErrorKind::rewiring,
                "delaunay flip: edge " + edge_name(e) + " is not flippable (quad corners " +
                    std::to_string(k) + " and " + std::to_string(l) + " already share an edge)");
        }
        if (++flips > cap) {
            fail(
                ErrorKind::rewiring,
                "delaunay flip: no termination after " + std::to_string(cap) + " flips");
        }

        // Unfold both triangles around vertex i and close the quad diagonal.
        const double angle_k = opposite_angle(len(j, k), lij, len(i, k));
        const double angle_l = opposite_angle(len(j, l), lij, len(i, l));
        const double a = len(i, k);
        const double b = len(i, l);
        const double theta = angle_k + angle_l;
        const double lkl = std::sqrt(std::max(0.0, a * a + b * b - 2.0 * a * b * std::cos(theta)));

        lengths.erase(e);
        lengths[edge_key(k, l)] = lkl;
        faces[static_cast<std::size_t>(f1)] = {i, l, k};
        faces[static_cast<std::size_t>(f2)] = {l, j, k};

        ef.erase(e);
        ef[edge_key(k, l)] = {f1, f2};
        auto relabel = [&](EdgeKey edge, int from, int to) {
            for (int& f : ef[edge]) {
                if (f == from) f = to;
            }
        };
        // (i, l) moved from f2 to f1; (j, k) moved from f1 to f2.
        relabel(edge_key(i, l), f2, f1);
        relabel(edge_key(j, k), f1, f2);

        for (const EdgeKey& q : {edge_key(i, k), edge_key(k, j), edge_key(j, l), edge_key(l, i)}) {
            if (queued.insert(q).second) queue.push_back(q);
        }
    }
    if (stats != nullptr) stats->flips = flips;
    return IntrinsicMesh(mesh.vertex_count(), std::move(faces), std::move(lengths), IntrinsicMesh::Origin::rewired);
}

double MeshOperators::min_offdiagonal_weight() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : cot_weights.entries()) m = std::min(m, e.value);
    return m;
}

MeshOperators mesh_operators(const IntrinsicMesh& input, bool rewire)
{
    const ManifoldReport report = check_manifold(input.vertex_count(), input.faces());
    if (!report.manifold()) {
        std::string msg = "mesh operators: input is not manifold";
        if (!report.edges.empty()) msg += "; edge " + edge_name(report.edges.front().edge) + " has " + std::to_string(report.edges.front().face_count) + " faces";
        if (!report.vertices.empty()) msg += "; vertex " + std::to_string(report.vertices.front().vertex) + ": " + report.vertices.front().reason;
        fail(ErrorKind::geometry, msg);
    }

    MeshOperators ops;
    ops.n = input.vertex_count();
    IntrinsicMesh mesh = input;
    if (rewire) {
        FlipStats stats;
        mesh = intrinsic_delaunay_flip(input, &stats);
        ops.rewired = true;
        ops.flips = stats.flips;
    } else {
        const auto bad = delaunay_violations(input);
        if (!bad.empty()) {
            std::string msg = "mesh operators: " + std::to_string(bad.size()) +
                " edge(s) violate the Delaunay criterion and rewiring is disabled:";
            for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k) msg += " " + edge_name(bad[k]);
            if (bad.size() > 20) msg += " ...";
            fail(ErrorKind::precondition, msg);
        }
    }

    ops.cot_weights = cotangent_weights(mesh);
    ops.areas = barycentric_areas(mesh);
    ops.weighted_degrees.assign(static_cast<std::size_t>(ops.n), 0.0);
    for (const auto& e : ops.cot_weights.entries()) {
        ops.weighted_degrees[static_cast<std::size_t>(e.i)] += e.value;
        ops.weighted_degrees[static_cast<std::size_t>(e.j)] += e.value;
    }
    std::vector<double> s(static_cast<std::size_t>(ops.n));
    for (int v = 0; v < ops.n; ++v) {
        const double d = ops.weighted_degrees[static_cast<std::size_t>(v)];
        require(
            d > 0.0,
            ErrorKind::degree,
            "mesh operators: vertex " + std::to_string(v) + " has nonpositive weighted degree");
        s[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(d);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * ops.cot_weights.entries().size());
    for (const auto& e : ops.cot_weights.entries()) {
        const double v = e.value * s[static_cast<std::size_t>(e.i)] * s[static_cast<std::size_t>(e.j)];
        triplets.emplace_back(e.i, e.j, v);
        triplets.emplace_back(e.j, e.i, v);
    }
    auto a = std::make_shared<SparseOperator>(ops.n, ops.n);
    a->setFromTriplets(triplets.begin(), triplets.end());
    ops.adjacency = std::move(a);
    ops.stiffness = ops.cot_weights.to_sparse();
    return ops;
}

MeshOperators mesh_operators(const TriMesh& mesh, bool rewire)
{
    return mesh_operators(IntrinsicMesh::from_embedded(mesh), rewire);
}

void require_nonnegative_weights(const MeshOperators& ops)
{
    for (const auto& e : ops.cot_weights.entries()) {
        if (e.value < -k_weight_tolerance) {
            fail(
                ErrorKind::precondition,
                "negative cotangent weight " + std::to_string(e.value) + " on edge " +
                    edge_name({e.i, e.j}) + "; the Delaunay assumption does not hold");
        }
    }
}

template <typename T>
double mesh_rayleigh_quotient(const MeshOperators& ops, const Matrix<T>& x)
{
    require_nonnegative_weights(ops);
    return rayleigh_quotient_operator(*ops.adjacency, x);
}

template <typename T>
double mesh_rayleigh_quotient_edge_form(const MeshOperators& ops, const Matrix<T>& x)
{
    require_nonnegative_weights(ops);
    require(x.rows() == ops.n, ErrorKind::dimension, "mesh rayleigh quotient: row count mismatch");
    const double denom = x.squaredNorm();
    require(denom > 0.0, ErrorKind::undefined, "rayleigh quotient undefined for zero features");
    double sum = 0.0;
    for (const auto& e : ops.cot_weights.entries()) {
        const double si = 1.0 / std::sqrt(ops.weighted_degrees[static_cast<std::size_t>(e.i)]);
        const double sj = 1.0 / std::sqrt(ops.weighted_degrees[static_cast<std::size_t>(e.j)]);
        sum += 2.0 * e.value * (x.row(e.i) * si - x.row(e.j) * sj).squaredNorm();
    }
    return 0.5 * sum / denom;
}

template double mesh_rayleigh_quotient(const MeshOperators&, const Matrix<double>&);
template double mesh_rayleigh_quotient(const MeshOperators&, const Matrix<Complex>&);
template double mesh_rayleigh_quotient_edge_form(const MeshOperators&, const Matrix<double>&);
template double mesh_rayleigh_quotient_edge_form(const MeshOperators&, const Matrix<Complex>&);

std::string mesh_operators_to_json(const MeshOperators& ops)
{
    nlohmann::json j;
    j["n"] = ops.n;
    j["rewired"] = ops.rewired;
    j["flips"] = ops.flips;
    j["edges"] = nlohmann::json::array();
    for (const auto& e : ops.cot_weights.entries()) j["edges"].push_back({e.i, e.j, e.value});
    j["areas"] = ops.areas;
    return j.dump();
}

} // namespace smoothdyn
