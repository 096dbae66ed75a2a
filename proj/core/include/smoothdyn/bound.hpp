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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace smoothdyn {

/// A map on C^n written in its real form R^{2n} (or any R^m).
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Spread of f over one orbit (sphere of fixed radius).
enum class VarianceMode {
    /// Var ||f(z)||, the quantity the unitary error bound integrates.
    norm,
    /// E ||f(z) - E f||^2, the spread of the vector values.
    vector,
};

std::string_view to_string(VarianceMode mode);
VarianceMode variance_mode_from_string(std::string_view name);

struct OrbitSampler
{
    /// Real dimension m of the space.
    int dimension = 2;
    /// Radial density, already including the sphere-measure factor, so that
    /// its integral over [r_min, r_max] is 1.
    std::function<double(double)> radius_density;
    double r_min = 0.0;
    double r_max = 1.0;
    VectorFn target;
    std::uint64_t seed = 0;

    /// Checks dimension, support and that the density is nonnegative and
    /// integrates to 1 within 2%.
    void validate() const;
};

struct OrbitVariance
{
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo spread of f over the sphere of the given radius, sampled as
/// normalized Gaussian vectors. Non-finite f values raise a numerical error
/// naming the point.
OrbitVariance orbit_variance(
    const OrbitSampler& sampler,
    double radius,
    int n_samples,
    VarianceMode mode,
    std::uint64_t seed);

/// Var ||f|| on the orbit, the norm mode of orbit_variance.
double orbit_norm_variance(const OrbitSampler& sampler, double radius, int n_samples);

struct BoundEstimate
{
    double value = 0.0;
    double mc_stderr = 0.0;
    /// 1 - integral of the density over the radius grid.
    double truncated_mass = 0.0;
    std::vector<std::string> warnings;
    std::vector<double> radii;
    std::vector<double> variances;
};

/// Trapezoid rule for integral p(r) V(r) dr over `radius_grid`; `n_samples` are
/// split evenly over the radii (at least 1000 each). Radius k uses the
/// sub-seed derive_seed(seed, k).
BoundEstimate lower_bound_estimate(
    const OrbitSampler& sampler,
    const std::vector<double>& radius_grid,
    long n_samples,
    VarianceMode mode = VarianceMode::norm,
    int threads = 0);

/// `count` evenly spaced radii covering [r_min, r_max].
std::vector<double> radius_grid(const OrbitSampler& sampler, int count = 200);

struct BoundReport
{
    double empirical_error = 0.0;
    double empirical_stderr = 0.0;
    double bound = 0.0;
    double mc_stderr = 0.0;
    bool satisfied = false;
    VarianceMode mode = VarianceMode::norm;
    std::vector<std::string> warnings;
};

/// Monte Carlo estimate of integral p ||u(z) - f(z)||^2 against the bound;
/// satisfied when error >= bound - 3 * combined standard error.
BoundReport verify_bound(
    const OrbitSampler& sampler,
    const VectorFn& unitary_map,
    long n_samples,
    VarianceMode mode = VarianceMode::norm,
    int radii = 200,
    int threads = 0);

/// {"empirical_error", "bound", "mc_stderr", "satisfied", ...}
std::string bound_report_to_json(const BoundReport& report);

/// Draws `count` points from the sampler's density (rows of the result).
RealMatrix sample_points(const OrbitSampler& sampler, long count, std::uint64_t seed);

struct RotationFit
{
    RealMatrix rotation;
    double final_loss = 0.0;
    int steps = 0;
};

/// Best constant rotation z -> exp(S - S^T) z for the sampler's target, found
/// by Adam on the generator S over a fixed batch of samples.
RotationFit fit_rotation(const OrbitSampler& sampler, long batch, int steps, double lr, std::uint64_t seed);

/// z -> |z| f(z) / |f(z)|: norm preserving, and of the form U(z) z with U(z)
/// unitary. Attains the orbitwise optimum of the norm-mode bound argument.
VectorFn norm_matched_map(const VectorFn& f);

/// Unit-disk example on C ~ R^2 in real form: f(z) = (sin t + r, cos t + r)
/// for z = r (cos t, sin t), with p(r) = 2r on [0, 1].
OrbitSampler unit_disk_sampler(std::uint64_t seed);

/// Named radial densities on [r_min, r_max]: "disk" (2r on [0, 1]), "ball"
/// (m r^{m-1} on [0, 1]) and "uniform".
std::function<double(double)> make_radius_density(const std::string& name, int dimension, double r_min, double r_max);

/// Named targets: "unit_disk", "scale2" (2z), "unitary" (a fixed random
/// rotation) and "radial_rotation" (rotation by an angle equal to |z| in
/// every coordinate pair).
VectorFn make_target(const std::string& name, int dimension, std::uint64_t seed);

} // namespace smoothdyn
