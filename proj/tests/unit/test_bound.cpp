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

#include <smoothdyn/bound.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace smoothdyn;
using namespace smoothdyn::test;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Var over theta of |f| on the circle of radius r, periodic trapezoid rule.
double disk_norm_variance_quadrature(double r)
{
    const int m = 4096;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = two_pi * k / m;
        const double a = std::sin(t) + r;
        const double b = std::cos(t) + r;
        const double norm = std::sqrt(a * a + b * b);
        s1 += norm / m;
        s2 += norm * norm / m;
    }
    return s2 - s1 * s1;
}

OrbitSampler named_sampler(const std::string& target, int dimension, std::uint64_t seed)
{
    OrbitSampler s;
    s.dimension = dimension;
    s.radius_density = make_radius_density("ball", dimension, 0.0, 1.0);
    s.target = make_target(target, dimension, seed);
    s.seed = seed;
    return s;
}

} // namespace

TEST_SUITE("bound")
{
    TEST_CASE("norm preserving and scaling targets have no orbit spread")
    {
        for (int dim : {2, 4, 6}) {
            const OrbitSampler u = named_sampler("unitary", dim, 1);
            CHECK(orbit_norm_variance(u, 0.7, 2000) < 1e-10);
            CHECK(orbit_norm_variance(named_sampler("scale2", dim, 1), 0.4, 2000) < 1e-10);
            CHECK(orbit_norm_variance(named_sampler("radial_rotation", dim, 1), 0.9, 2000) < 1e-10);
            CHECK(lower_bound_estimate(u, radius_grid(u, 20), 20000).value < 1e-10);
        }
    }

    TEST_CASE("unit disk orbit variance matches quadrature")
    {
        const OrbitSampler s = unit_disk_sampler(3);
        for (double r : {0.2, 0.5, 0.9}) {
            const double mc = orbit_norm_variance(s, r, 400000);
            CHECK(std::abs(mc - disk_norm_variance_quadrature(r)) < 0.01 * disk_norm_variance_quadrature(r));
            const OrbitVariance v = orbit_variance(s, r, 100000, VarianceMode::vector, 4);
            CHECK(v.value == doctest::Approx(1.0).epsilon(0.01));
        }
    }

    TEST_CASE("unit disk bound in both modes")
    {
        const OrbitSampler s = unit_disk_sampler(5);
        const auto grid = radius_grid(s, 100);
        const BoundEstimate vec = lower_bound_estimate(s, grid, 400000, VarianceMode::vector, 1);
        CHECK(std::abs(vec.value - 1.0) < 0.02);
        CHECK(vec.truncated_mass == doctest::Approx(0.0).epsilon(1e-9));

        // Nested quadrature oracle for the norm mode.
        double oracle = 0.0;
        const int m = 400;
        for (int k = 0; k < m; ++k) {
            const double r = (k + 0.5) / m;
            oracle += 2.0 * r * disk_norm_variance_quadrature(r) / m;
        }
        const BoundEstimate nrm = lower_bound_estimate(s, grid, 400000, VarianceMode::norm, 1);
        CHECK(std::abs(nrm.value - oracle) < 0.02 * oracle);
    }

    TEST_CASE("estimates do not depend on the thread count")
    {
        const OrbitSampler s = unit_disk_sampler(6);
        const auto grid = radius_grid(s, 16);
        const double a = lower_bound_estimate(s, grid, 32000, VarianceMode::norm, 1).value;
        const double b = lower_bound_estimate(s, grid, 32000, VarianceMode::norm, 3).value;
        CHECK(a == b);
    }

    TEST_CASE("fitted rotation respects the bound")
    {
        const OrbitSampler s = unit_disk_sampler(7);
        const RotationFit fit = fit_rotation(s, 2048, 200, 0.05, 8);
        CHECK((fit.rotation.transpose() * fit.rotation - RealMatrix::Identity(2, 2)).norm() < 1e-10);
        const RealMatrix rot = fit.rotation;
        const VectorFn u = [rot](const Eigen::VectorXd& z) { return Eigen::VectorXd(rot * z); };
        const BoundReport rep = verify_bound(s, u, 200000, VarianceMode::vector, 50, 1);
        CHECK(rep.satisfied);
        CHECK(rep.empirical_error >= rep.bound);

        const BoundReport matched = verify_bound(s, norm_matched_map(s.target), 200000, VarianceMode::norm, 50, 1);
        CHECK(matched.satisfied);
    }

    TEST_CASE("norm matched map preserves norms")
    {
        const OrbitSampler s = unit_disk_sampler(9);
        const VectorFn g = norm_matched_map(s.target);
        const RealMatrix pts = sample_points(s, 100, 10);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            const Eigen::VectorXd z = pts.row(i).transpose();
            CHECK(g(z).norm() == doctest::Approx(z.norm()).epsilon(1e-12));
        }
    }

    TEST_CASE("sampled radii follow the density")
    {
        const RealMatrix pts = sample_points(unit_disk_sampler(11), 200000, 12);
        CHECK(pts.rowwise().norm().mean() == doctest::Approx(2.0 / 3.0).epsilon(0.005));
    }

    TEST_CASE("sampler validation")
    {
        OrbitSampler s = unit_disk_sampler(1);
        s.radius_density = [](double) { return 3.0; };
        CHECK_THROWS_AS(s.validate(), Error);
        OrbitSampler bad = unit_disk_sampler(1);
        bad.target = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(z / 0.0); };
        CHECK(error_kind_of([&] { (void)orbit_norm_variance(bad, 0.5, 1000); }) == ErrorKind::numerical);
        CHECK(error_kind_of([] { (void)variance_mode_from_string("max"); }) == ErrorKind::config);
    }
}
