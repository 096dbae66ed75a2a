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

#include <smoothdyn/mesh.hpp>

#include <cstdint>

namespace smoothdyn {

/// Regular icosahedron with the given edge length, centred at the origin.
TriMesh icosahedron(double edge_length = 1.0);

/// Loop-style midpoint subdivision of the icosahedron, projected to a sphere.
/// Vertex counts: 12, 42, 162, 642, 2562 for levels 0..4.
TriMesh icosphere(int subdivisions, double radius = 1.0);

/// Torus with major radius R, minor radius r, on a nu x nv parameter grid.
TriMesh torus(double major_radius, double minor_radius, int nu, int nv);

/// Icosphere with each vertex displaced by `amplitude` times the mean edge
/// length along a random direction (not reprojected).
TriMesh perturbed_icosphere(int subdivisions, double amplitude, std::uint64_t seed);

/// Icosphere with smooth random radial bumps, r = 1 + amplitude * sum of a few
/// low-order harmonics.
TriMesh bumpy_sphere(int subdivisions, double amplitude, std::uint64_t seed);

/// Axis-aligned ellipsoid obtained by scaling an icosphere.
TriMesh ellipsoid(int subdivisions, double a, double b, double c);

/// Planar patch in z = 0 on [0, 1]^2 with rows x cols vertices; interior
/// vertices jittered by `jitter` times the grid spacing.
TriMesh flat_patch(int rows, int cols, double jitter, std::uint64_t seed);

/// Indices of vertices not on the boundary of an open mesh.
std::vector<int> interior_vertices(const TriMesh& mesh);

} // namespace smoothdyn
