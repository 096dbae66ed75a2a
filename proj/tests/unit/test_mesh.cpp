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

#include <smoothdyn/mesh.hpp>
#include <smoothdyn/mesh_io.hpp>
#include <smoothdyn/shapes.hpp>

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace smoothdyn;
using namespace smoothdyn::test;

namespace {

constexpr double pi = std::numbers::pi;

TriMesh planar(std::vector<std::array<double, 2>> xy, std::vector<Face> faces)
{
    RealMatrix p = RealMatrix::Zero(static_cast<Eigen::Index>(xy.size()), 3);
    for (std::size_t i = 0; i < xy.size(); ++i) {
        p(static_cast<Eigen::Index>(i), 0) = xy[i][0];
        p(static_cast<Eigen::Index>(i), 1) = xy[i][1];
    }
    return TriMesh(p, std::move(faces));
}

TriMesh equilateral_pair()
{
    const double h = std::sqrt(3.0) / 2.0;
    return planar({{0, 0}, {1, 0}, {0.5, h}, {0.5, -h}}, {{0, 1, 2}, {1, 0, 3}});
}

// Rhombus whose diagonal 0-1 sees 100 degree angles at 2 and 3.
TriMesh obtuse_pair()
{
    const double s = std::sin(50.0 * pi / 180.0);
    const double c = std::cos(50.0 * pi / 180.0);
    return planar({{-s, 0}, {s, 0}, {0, c}, {0, -c}}, {{0, 1, 2}, {1, 0, 3}});
}

} // namespace

TEST_SUITE("mesh")
{
    TEST_CASE("manifold checks")
    {
        const auto tri = check_manifold(3, {{0, 1, 2}});
        CHECK(tri.manifold());
        CHECK(tri.boundary_edges == 3);

        const TriMesh ico = icosahedron();
        const auto r = check_manifold(ico);
        CHECK(r.manifold());
        CHECK(r.boundary_edges == 0);
        CHECK(ico.vertex_count() - static_cast<int>(ico.edges().size()) + static_cast<int>(ico.faces().size()) == 2);

        const auto bowtie = check_manifold(5, {{0, 1, 2}, {0, 3, 4}});
        CHECK_FALSE(bowtie.manifold());
        CHECK(bowtie.vertices.size() == 1);
        CHECK(bowtie.vertices[0].vertex == 0);

        const auto fin = check_manifold(5, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
        CHECK_FALSE(fin.manifold());
        CHECK(fin.edges.size() == 1);
        CHECK(fin.edges[0].face_count == 3);
    }

    TEST_CASE("cotangent weights by hand")
    {
        const SparseSym w = cotangent_weights(equilateral_pair());
        CHECK(w.at(0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
        // Boundary edges see one 60 degree angle.
        CHECK(w.at(0, 2) == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-12));

        const TriMesh square = planar({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
        CHECK(std::abs(cotangent_weights(square).at(0, 2)) < 1e-14);

        const RealMatrix d = w.to_dense();
        CHECK(d.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
    }

    TEST_CASE("degenerate triangles are geometry errors")
    {
        const TriMesh flat = planar({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}});
        CHECK(error_kind_of([&] { (void)cotangent_weights(flat); }) == ErrorKind::geometry);
        CHECK(error_kind_of([&] { (void)barycentric_areas(flat); }) == ErrorKind::geometry);
        CHECK(error_kind_of([] { (void)TriMesh(RealMatrix::Zero(3, 3), {{0, 1, 1}}); }) == ErrorKind::geometry);
        CHECK(error_kind_of([] { (void)TriMesh(RealMatrix::Zero(3, 3), {{0, 1, 3}}); }) == ErrorKind::geometry);
    }

    TEST_CASE("barycentric areas")
    {
        const auto a = barycentric_areas(planar({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}));
        for (double v : a) CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

        const auto ico = barycentric_areas(icosahedron(1.0));
        CHECK(ico.size() == 12);
        for (double v : ico) CHECK(v == doctest::Approx(5.0 * std::sqrt(3.0) / 4.0 / 3.0).epsilon(1e-12));

        const TriMesh sphere = icosphere(2);
        double total = 0.0;
        for (double v : barycentric_areas(sphere)) total += v;
        CHECK(total == doctest::Approx(sphere.surface_area()).epsilon(1e-12));
    }

    TEST_CASE("triangle area is stable for needles")
    {
        CHECK(triangle_area(3, 4, 5) == doctest::Approx(6.0));
        CHECK(triangle_area(1.0, 1.0, 1e-9) == doctest::Approx(0.5e-9).epsilon(1e-6));
    }

    TEST_CASE("delaunay violations")
    {
        CHECK(delaunay_violations(IntrinsicMesh::from_embedded(equilateral_pair())).empty());
        const auto v = delaunay_violations(IntrinsicMesh::from_embedded(obtuse_pair()));
        REQUIRE(v.size() == 1);
        CHECK(v[0] == EdgeKey{0, 1});

        // Rectangle split along its long diagonal, with a vertex pushed toward it.
        const TriMesh thin = planar({{0, 0}, {3, 0}, {3, 1}, {0, 1}, {1.5, 0.2}}, {{0, 4, 2}, {4, 1, 2}, {0, 2, 3}});
        const auto angle = [](double a, double b, double c) { return std::acos((b * b + c * c - a * a) / (2 * b * c)); };
        const IntrinsicMesh im = IntrinsicMesh::from_embedded(thin);
        const double opposite_4 = angle(im.length(0, 2), im.length(0, 4), im.length(2, 4));
        const double opposite_3 = angle(im.length(0, 2), im.length(0, 3), im.length(2, 3));
        CHECK(opposite_4 + opposite_3 > pi);
        const auto tv = delaunay_violations(im);
        REQUIRE(tv.size() == 1);
        CHECK(tv[0] == EdgeKey{0, 2});
    }

    TEST_CASE("intrinsic flips")
    {
        FlipStats stats;
        const IntrinsicMesh eq = IntrinsicMesh::from_embedded(equilateral_pair());
        const IntrinsicMesh same = intrinsic_delaunay_flip(eq, &stats);
        CHECK(stats.flips == 0);
        CHECK(same.lengths() == eq.lengths());
        CHECK(same.origin() == IntrinsicMesh::Origin::rewired);

        const IntrinsicMesh flipped = intrinsic_delaunay_flip(IntrinsicMesh::from_embedded(obtuse_pair()), &stats);
        CHECK(stats.flips == 1);
        CHECK(flipped.lengths().count(EdgeKey{0, 1}) == 0);
        CHECK(flipped.length(2, 3) == doctest::Approx(2.0 * std::cos(50.0 * pi / 180.0)).epsilon(1e-12));
        CHECK(delaunay_violations(flipped).empty());
        CHECK(cotangent_weights(flipped).at(2, 3) >= 0.0);
        CHECK(flipped.surface_area() == doctest::Approx(obtuse_pair().surface_area()).epsilon(1e-12));
    }

    TEST_CASE("flips preserve area and topology on random meshes")
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const TriMesh m = flat_patch(6, 6, 0.45, seed);
            const IntrinsicMesh before = IntrinsicMesh::from_embedded(m);
            const IntrinsicMesh after = intrinsic_delaunay_flip(before);
            CHECK(delaunay_violations(after).empty());
            CHECK(after.euler_characteristic() == before.euler_characteristic());
            CHECK(after.edge_count() == before.edge_count());
            CHECK(after.surface_area() == doctest::Approx(before.surface_area()).epsilon(1e-10));
            const MeshOperators ops = mesh_operators(m, true);
            CHECK(ops.min_offdiagonal_weight() >= -k_weight_tolerance);
        }
    }

    TEST_CASE("operators on the icosahedron")
    {
        const MeshOperators ops = mesh_operators(icosahedron(), false);
        const RealMatrix a = ops.normalized_adjacency();
        int nonzero = 0;
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            if (a.data()[k] != 0.0) {
                ++nonzero;
                CHECK(a.data()[k] == doctest::Approx(0.2).epsilon(1e-12));
            }
        }
        CHECK(nonzero == 60);
        CHECK_FALSE(ops.rewired);
    }

    TEST_CASE("operators on the equilateral pair")
    {
        const MeshOperators ops = mesh_operators(equilateral_pair(), false);
        const RealMatrix a = ops.normalized_adjacency();
        CHECK((a - a.transpose()).norm() < 1e-15);
        const double w01 = 1.0 / std::sqrt(3.0);
        const double wb = 0.5 / std::sqrt(3.0);
        const double d0 = w01 + 2.0 * wb;
        const double d2 = 2.0 * wb;
        CHECK(a(0, 1) == doctest::Approx(w01 / d0).epsilon(1e-12));
        CHECK(a(0, 2) == doctest::Approx(wb / std::sqrt(d0 * d2)).epsilon(1e-12));
    }

    TEST_CASE("non-Delaunay input needs rewiring")
    {
        CHECK(error_kind_of([] { (void)mesh_operators(obtuse_pair(), false); }) == ErrorKind::precondition);
        const MeshOperators ops = mesh_operators(obtuse_pair(), true);
        CHECK(ops.rewired);
        CHECK(ops.flips == 1);
        CHECK_NOTHROW(require_nonnegative_weights(ops));
    }

    TEST_CASE("normalized mesh adjacency is symmetric with spectrum in [-1, 1]")
    {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const MeshOperators ops = mesh_operators(perturbed_icosphere(2, 0.05, seed), true);
            const RealMatrix a = ops.normalized_adjacency();
            CHECK((a - a.transpose()).norm() < 1e-12);
            Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
            CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-10);
        }
    }

    TEST_CASE("mesh rayleigh quotient")
    {
        const MeshOperators ops = mesh_operators(icosphere(2), true);
        // Constant features are not in the kernel of the weighted operator; the
        // D^{1/2} 1 direction is.
        RealMatrix x(ops.n, 1);
        for (int i = 0; i < ops.n; ++i) x(i, 0) = std::sqrt(ops.weighted_degrees[static_cast<std::size_t>(i)]);
        CHECK(std::abs(mesh_rayleigh_quotient(ops, x)) < 1e-12);
        CHECK(error_kind_of([&] { (void)mesh_rayleigh_quotient(ops, RealMatrix(RealMatrix::Zero(ops.n, 2))); }) ==
              ErrorKind::undefined);

        Rng rng(21);
        for (int trial = 0; trial < 20; ++trial) {
            const RealMatrix r = random_real(rng, ops.n, 3);
            CHECK(std::abs(mesh_rayleigh_quotient(ops, r) - mesh_rayleigh_quotient_edge_form(ops, r)) < 1e-12);
            const ComplexMatrix c = random_complex(rng, ops.n, 2);
            CHECK(std::abs(mesh_rayleigh_quotient(ops, c) - mesh_rayleigh_quotient_edge_form(ops, c)) < 1e-12);
        }
    }

    TEST_CASE("off and obj io")
    {
        const TriMesh m = torus(1.0, 0.3, 8, 6);
        std::stringstream ss;
        write_off(ss, m);
        const TriMesh back = read_off(ss);
        CHECK(back.faces() == m.faces());
        CHECK((back.positions() - m.positions()).norm() < 1e-12);

        std::istringstream obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2/5 4/6 3/7\n");
        const TriMesh q = read_obj(obj);
        CHECK(q.vertex_count() == 4);
        CHECK(q.faces().size() == 2);
        CHECK(q.faces()[1] == Face{1, 3, 2});

        std::istringstream bad("OFF\n3 1 0\n0 0 0\n1 0 0\n");
        CHECK_THROWS_AS(read_off(bad), Error);
    }
}
