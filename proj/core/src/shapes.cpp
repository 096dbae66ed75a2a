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

#include <smoothdyn/rng.hpp>
#include <smoothdyn/shapes.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace smoothdyn {

namespace {

struct Soup
{
    std::vector<Eigen::Vector3d> points;
    std::vector<Face> faces;

    TriMesh build() const
    {
        RealMatrix p(static_cast<Eigen::Index>(points.size()), 3);
        for (std::size_t v = 0; v < points.size(); ++v) p.row(static_cast<Eigen::Index>(v)) = points[v].transpose();
        return TriMesh(std::move(p), faces);
    }
};

Soup icosahedron_soup()
{
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    Soup s;
    s.points = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    s.faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    return s;
}

Soup sphere_soup(int subdivisions)
{
    require(subdivisions >= 0 && subdivisions <= 7, ErrorKind::argument, "icosphere: subdivisions must be in [0, 7]");
    Soup s = icosahedron_soup();
    for (auto& p : s.points) p.normalize();
    for (int level = 0; level < subdivisions; ++level) {
        std::map<EdgeKey, int> midpoint;
        auto mid = [&](int a, int b) {
            const EdgeKey k = edge_key(a, b);
            const auto it = midpoint.find(k);
            if (it != midpoint.end()) return it->second;
            s.points.push_back((s.points[static_cast<std::size_t>(a)] + s.points[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(s.points.size()) - 1;
            midpoint.emplace(k, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(s.faces.size() * 4);
        for (const Face& f : s.faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.faces = std::move(next);
    }
    return s;
}

double mean_edge_length(const Soup& s)
{
    std::set<EdgeKey> edges;
    for (const Face& f : s.faces)
        for (int c = 0; c < 3; ++c) edges.insert(edge_key(f[c], f[(c + 1) % 3]));
    double total = 0.0;
    for (const auto& [a, b] : edges)
        total += (s.points[static_cast<std::size_t>(a)] - s.points[static_cast<std::size_t>(b)]).norm();
    return total / static_cast<double>(edges.size());
}

} // namespace

TriMesh icosahedron(double edge_length)
{
    Soup s = icosahedron_soup();
    // Raw edge length is 2.
    for (auto& p : s.points) p *= edge_length / 2.0;
    return s.build();
}

TriMesh icosphere(int subdivisions, double radius)
{
    Soup s = sphere_soup(subdivisions);
    for (auto& p : s.points) p *= radius;
    return s.build();
}

TriMesh torus(double major_radius, double minor_radius, int nu, int nv)
{
    require(nu >= 3 && nv >= 3, ErrorKind::argument, "torus: nu and nv must be >= 3");
    require(
        major_radius > minor_radius && minor_radius > 0.0,
        ErrorKind::argument,
        "torus: need major_radius > minor_radius > 0");
    Soup s;
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * std::numbers::pi * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = 2.0 * std::numbers::pi * j / nv;
            const double ring = major_radius + minor_radius * std::cos(v);
            s.points.emplace_back(ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v));
        }
    }
    auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            s.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            s.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return s.build();
}

TriMesh perturbed_icosphere(int subdivisions, double amplitude, std::uint64_t seed)
{
    Soup s = sphere_soup(subdivisions);
    const double h = mean_edge_length(s);
    Rng rng(derive_seed(seed, "perturbed_icosphere"));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& p : s.points) {
        Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
        dir.normalize();
        p += amplitude * h * dir;
    }
    return s.build();
}

TriMesh bumpy_sphere(int subdivisions, double amplitude, std::uint64_t seed)
{
    Soup s = sphere_soup(subdivisions);
    Rng rng(derive_seed(seed, "bumpy_sphere"));
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int k_bumps = 6;
    std::vector<Eigen::Vector3d> centres;
    std::vector<double> weights;
    for (int k = 0; k < k_bumps; ++k) {
        centres.push_back(Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized());
        weights.push_back(normal(rng));
    }
    for (auto& p : s.points) {
        double r = 1.0;
        for (int k = 0; k < k_bumps; ++k) r += amplitude * weights[static_cast<std::size_t>(k)] * std::exp(-2.0 * (p - centres[static_cast<std::size_t>(k)]).squaredNorm());
        p *= r;
    }
    return s.build();
}

TriMesh ellipsoid(int subdivisions, double a, double b, double c)
{
    require(a > 0.0 && b > 0.0 && c > 0.0, ErrorKind::argument, "ellipsoid: semi-axes must be positive");
    Soup s = sphere_soup(subdivisions);
    for (auto& p : s.points) p = Eigen::Vector3d(a * p.x(), b * p.y(), c * p.z());
    return s.build();
}

TriMesh flat_patch(int rows, int cols, double jitter, std::uint64_t seed)
{
    require(rows >= 2 && cols >= 2, ErrorKind::argument, "flat_patch: need at least 2 x 2 vertices");
    require(jitter >= 0.0 && jitter < 0.5, ErrorKind::argument, "flat_patch: jitter must be in [0, 0.5)");
    Rng rng(derive_seed(seed, "flat_patch"));
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const double hx = 1.0 / (cols - 1);
    const double hy = 1.0 / (rows - 1);
    Soup s;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double x = c * hx;
            double y = r * hy;
            if (r > 0 && r + 1 < rows && c > 0 && c + 1 < cols) {
                x += jitter * hx * uniform(rng);
                y += jitter * hy * uniform(rng);
            }
            s.points.emplace_back(x, y, 0.0);
        }
    }
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int a = r * cols + c;
            s.faces.push_back({a, a + 1, a + cols + 1});
            s.faces.push_back({a, a + cols + 1, a + cols});
        }
    }
    return s.build();
}

std::vector<int> interior_vertices(const TriMesh& mesh)
{
    std::map<EdgeKey, int> count;
    for (const Face& f : mesh.faces())
        for (int c = 0; c < 3; ++c) ++count[edge_key(f[c], f[(c + 1) % 3])];
    std::vector<bool> boundary(static_cast<std::size_t>(mesh.vertex_count()), false);
    for (const auto& [e, k] : count) {
        if (k == 1) {
            boundary[static_cast<std::size_t>(e.first)] = true;
            boundary[static_cast<std::size_t>(e.second)] = true;
        }
    }
    std::vector<int> out;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (!boundary[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

} // namespace smoothdyn
