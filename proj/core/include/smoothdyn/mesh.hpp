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

#include <smoothdyn/linalg.hpp>

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace smoothdyn {

using Face = std::array<int, 3>;
using EdgeKey = std::pair<int, int>; // always (min, max)

inline EdgeKey edge_key(int a, int b)
{
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Embedded triangle mesh.
class TriMesh
{
public:
    TriMesh() = default;

    /// positions is n x 3. Throws geometry errors for out-of-range indices and
    /// faces with a repeated vertex.
    TriMesh(RealMatrix positions, std::vector<Face> faces);

    int vertex_count() const { return static_cast<int>(m_positions.rows()); }
    const RealMatrix& positions() const { return m_positions; }
    const std::vector<Face>& faces() const { return m_faces; }
    /// Union of face boundary edges, sorted.
    const std::vector<EdgeKey>& edges() const { return m_edges; }

    double surface_area() const;

private:
    RealMatrix m_positions;
    std::vector<Face> m_faces;
    std::vector<EdgeKey> m_edges;
};

struct ManifoldReport
{
    struct EdgeViolation
    {
        EdgeKey edge;
        int face_count = 0;
    };
    struct VertexViolation
    {
        int vertex = 0;
        std::string reason;
    };

    std::vector<EdgeViolation> edges;
    std::vector<VertexViolation> vertices;
    int boundary_edges = 0;

    bool manifold() const { return edges.empty() && vertices.empty(); }
};

ManifoldReport check_manifold(int vertex_count, const std::vector<Face>& faces);
ManifoldReport check_manifold(const TriMesh& mesh);

/// Triangulation carrying only edge lengths. After intrinsic flips an edge need
/// not be a straight segment in any embedding.
class IntrinsicMesh
{
public:
    enum class Origin { embedded, rewired };

    IntrinsicMesh() = default;

    /// Every face must have all three edge lengths present and satisfy the
    /// strict triangle inequality (geometry error otherwise).
    IntrinsicMesh(int vertex_count, std::vector<Face> faces, std::map<EdgeKey, double> lengths, Origin origin);

    static IntrinsicMesh from_embedded(const TriMesh& mesh);

    int vertex_count() const { return m_n; }
    const std::vector<Face>& faces() const { return m_faces; }
    const std::map<EdgeKey, double>& lengths() const { return m_lengths; }
    double length(int a, int b) const;
    Origin origin() const { return m_origin; }

    std::size_t edge_count() const { return m_lengths.size(); }
    int euler_characteristic() const;
    double face_area(std::size_t f) const;
    double surface_area() const;

private:
    int m_n = 0;
    std::vector<Face> m_faces;
    std::map<EdgeKey, double> m_lengths;
    Origin m_origin = Origin::embedded;
};

/// Heron's formula in the numerically stable (Kahan) arrangement.
double triangle_area(double a, double b, double c);

/// W_ij = 1/2 (cot alpha_ij + cot beta_ij), one-sided on boundary edges;
/// diagonal is minus the off-diagonal row sum.
SparseSym cotangent_weights(const IntrinsicMesh& mesh);
SparseSym cotangent_weights(const TriMesh& mesh);

std::vector<double> barycentric_areas(const IntrinsicMesh& mesh);
std::vector<double> barycentric_areas(const TriMesh& mesh);

/// Interior edges with alpha + beta > pi + tol (radians).
std::vector<EdgeKey> delaunay_violations(const IntrinsicMesh& mesh, double tol = 1e-10);

struct FlipStats
{
    int flips = 0;
};

/// Flips non-Delaunay edges until none remain. New lengths come from unfolding
/// the two incident triangles into the plane.
IntrinsicMesh intrinsic_delaunay_flip(const IntrinsicMesh& mesh, FlipStats* stats = nullptr);

struct MeshOperators
{
    int n = 0;
    bool rewired = false;
    int flips = 0;
    SparseSym cot_weights;
    std::vector<double> areas;
    std::vector<double> weighted_degrees;
    /// D^{-1/2} (W o A) D^{-1/2} over the (possibly rewired) edge set.
    std::shared_ptr<const SparseOperator> adjacency;
    /// Cotangent stiffness K (off-diagonal w_ij, diagonal -sum w_ij). The mesh
    /// Laplacian of the simulators is diag(areas)^{-1} K.
    SparseOperator stiffness;

    RealMatrix normalized_adjacency() const { return RealMatrix(*adjacency); }
    double min_offdiagonal_weight() const;
};

/// Throws a precondition error listing violating edges when rewire is false
/// and the mesh is not intrinsically Delaunay.
MeshOperators mesh_operators(const TriMesh& mesh, bool rewire);
MeshOperators mesh_operators(const IntrinsicMesh& mesh, bool rewire);

/// Off-diagonal weights above -k_weight_tolerance count as nonnegative.
inline constexpr double k_weight_tolerance = 1e-10;

/// Precondition error naming the first edge with a negative weight.
void require_nonnegative_weights(const MeshOperators& ops);

/// Trace form with the weighted normalized adjacency.
template <typename T>
double mesh_rayleigh_quotient(const MeshOperators& ops, const Matrix<T>& x);

/// 1/2 sum over ordered pairs of w_uv ||x_u/sqrt(d_u) - x_v/sqrt(d_v)||^2 / ||X||^2
/// with weighted degrees d.
template <typename T>
double mesh_rayleigh_quotient_edge_form(const MeshOperators& ops, const Matrix<T>& x);

/// {"edges": [[i, j, w], ...], "areas": [...]}
std::string mesh_operators_to_json(const MeshOperators& ops);

} // namespace smoothdyn
