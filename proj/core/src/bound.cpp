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

#include <smoothdyn/autodiff.hpp>
#include <smoothdyn/bound.hpp>
#include <smoothdyn/error.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/train.hpp>

#include <json.hpp>

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smoothdyn {

std::string_view to_string(VarianceMode mode)
{
    return mode == VarianceMode::norm ? "norm" : "vector";
}

VarianceMode variance_mode_from_string(std::string_view name)
{
    if (name == "norm") return VarianceMode::norm;
    if (name == "vector") return VarianceMode::vector;
    fail(ErrorKind::config, "unknown variance mode '" + std::string(name) + "'");
}

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y)
{
    double s = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

std::string format_point(const Eigen::VectorXd& z)
{
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z(i);
    os << ')';
    return os.str();
}

Eigen::VectorXd evaluate(const VectorFn& f, const Eigen::VectorXd& z, int dimension, const char* what)
{
    Eigen::VectorXd y = f(z);
    if (y.size() != dimension) {
        fail(ErrorKind::dimension, std::string(what) + ": map returned " + std::to_string(y.size()) + " values, expected " + std::to_string(dimension));
    }
    if (!y.allFinite()) fail(ErrorKind::numerical, std::string(what) + ": non-finite value at z = " + format_point(z));
    return y;
}

Eigen::VectorXd sphere_point(Rng& rng, int dimension, double radius)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd g(dimension);
    double n = 0.0;
    while (n == 0.0) {
        for (int i = 0; i < dimension; ++i) g(i) = normal(rng);
        n = g.norm();
    }
    return g * (radius / n);
}


} // namespace

void OrbitSampler::validate() const
{
    require(dimension >= 1, ErrorKind::config, "orbit sampler: dimension must be >= 1");
    require(r_min >= 0.0 && r_max > r_min, ErrorKind::config, "orbit sampler: need 0 <= r_min < r_max");
    require(static_cast<bool>(radius_density), ErrorKind::config, "orbit sampler: no radius density");
    require(static_cast<bool>(target), ErrorKind::config, "orbit sampler: no target map");
    constexpr int k_points = 2001;
    std::vector<double> r(k_points);
    std::vector<double> p(k_points);
    for (int k = 0; k < k_points; ++k) {
        r[static_cast<std::size_t>(k)] = r_min + (r_max - r_min) * k / (k_points - 1);
        p[static_cast<std::size_t>(k)] = radius_density(r[static_cast<std::size_t>(k)]);
        require(
            p[static_cast<std::size_t>(k)] >= 0.0 && std::isfinite(p[static_cast<std::size_t>(k)]),
            ErrorKind::config,
            "orbit sampler: radius density is negative or non-finite at r = " + std::to_string(r[static_cast<std::size_t>(k)]));
    }
    const double mass = trapezoid(r, p);
    require(
        std::abs(mass - 1.0) <= 0.02,
        ErrorKind::config,
        "orbit sampler: radius density integrates to " + std::to_string(mass) + " over [r_min, r_max], expected 1 within 2%");
}

OrbitVariance orbit_variance(const OrbitSampler& sampler, double radius, int n_samples, VarianceMode mode, std::uint64_t seed)
{
    require(radius > 0.0, ErrorKind::argument, "orbit_variance: radius must be > 0");
    require(n_samples >= 1000, ErrorKind::argument, "orbit_variance: need at least 1000 samples");
    Rng rng(seed);
    const int m = sampler.dimension;
    const auto n = static_cast<std::size_t>(n_samples);
    std::vector<Eigen::VectorXd> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = evaluate(sampler.target, sphere_point(rng, m, radius), m, "orbit_variance");
    }
    std::vector<double> y(n);
    if (mode == VarianceMode::norm) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += (y[i] = values[i].norm());
        mean /= static_cast<double>(n);
        for (double& v : y) v = (v - mean) * (v - mean);
    } else {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
        for (const auto& v : values) mean += v;
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = (values[i] - mean).squaredNorm();
    }
    double sum = 0.0;
    for (double v : y) sum += v;
    const double mean_sq = sum / static_cast<double>(n);
    double spread = 0.0;
    for (double v : y) spread += (v - mean_sq) * (v - mean_sq);
    OrbitVariance out;
    // Bessel correction for the estimated centre.
    out.value = sum / static_cast<double>(n - 1);
    out.std_error = std::sqrt(spread / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    return out;
}

double orbit_norm_variance(const OrbitSampler& sampler, double radius, int n_samples)
{
    return orbit_variance(sampler, radius, n_samples, VarianceMode::norm, derive_seed(sampler.seed, "orbit")).value;
}

std::vector<double> radius_grid(const OrbitSampler& sampler, int count)
{
    require(count >= 2, ErrorKind::argument, "radius_grid: need at least 2 radii");
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        r[static_cast<std::size_t>(k)] = sampler.r_min + (sampler.r_max - sampler.r_min) * k / (count - 1);
    }
    return r;
}

BoundEstimate lower_bound_estimate(
    const OrbitSampler& sampler,
    const std::vector<double>& grid,
    long n_samples,
    VarianceMode mode,
    int threads)
{
    sampler.validate();
    require(grid.size() >= 2, ErrorKind::argument, "lower_bound_estimate: need at least 2 radii");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        require(grid[k] > grid[k - 1] && grid[0] >= 0.0, ErrorKind::argument, "lower_bound_estimate: radii must be increasing and >= 0");
    }
    const int per_radius = static_cast<int>(std::max<long>(1000, n_samples / static_cast<long>(grid.size())));
    BoundEstimate est;
    est.radii = grid;
    est.variances.assign(grid.size(), 0.0);
    std::vector<double> errors(grid.size(), 0.0);
    detail::parallel_for(grid.size(), threads, [&](std::size_t k) {
        // The orbit at radius 0 is a single point.
        if (grid[k] == 0.0) return;
        const OrbitVariance v = orbit_variance(sampler, grid[k], per_radius, mode, derive_seed(sampler.seed, static_cast<std::uint64_t>(k)));
        est.variances[k] = v.value;
        errors[k] = v.std_error;
    });
    std::vector<double> density(grid.size());
    std::vector<double> integrand(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        density[k] = sampler.radius_density(grid[k]);
        integrand[k] = density[k] * est.variances[k];
    }
    est.value = trapezoid(grid, integrand);
    double var = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double left = k > 0 ? grid[k] - grid[k - 1] : 0.0;
        const double right = k + 1 < grid.size() ? grid[k + 1] - grid[k] : 0.0;
        const double w = 0.5 * (left + right) * density[k];
        var += w * w * errors[k] * errors[k];
    }
    est.mc_stderr = std::sqrt(var);
    est.truncated_mass = 1.0 - trapezoid(grid, density);
    if (std::abs(est.truncated_mass) > 0.02) {
        est.warnings.push_back(
            "radius grid misses density mass " + std::to_string(est.truncated_mass) + " of the support");
    }
    return est;
}

RealMatrix sample_points(const OrbitSampler& sampler, long count, std::uint64_t seed)
{
    require(count >= 1, ErrorKind::argument, "sample_points: count must be >= 1");
    // Tabulated inverse CDF of the radial density.
    constexpr int k_table = 8193;
    std::vector<double> r(k_table);
    std::vector<double> cdf(k_table, 0.0);
    for (int k = 0; k < k_table; ++k) r[static_cast<std::size_t>(k)] = sampler.r_min + (sampler.r_max - sampler.r_min) * k / (k_table - 1);
    for (std::size_t k = 1; k < r.size(); ++k) {
        cdf[k] = cdf[k - 1] + 0.5 * (r[k] - r[k - 1]) * (sampler.radius_density(r[k]) + sampler.radius_density(r[k - 1]));
    }
    require(cdf.back() > 0.0, ErrorKind::config, "sample_points: radius density has no mass");
    for (double& c : cdf) c /= cdf.back();
    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    RealMatrix out(count, sampler.dimension);
    for (long i = 0; i < count; ++i) {
        const double u = uniform(rng);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        const std::size_t lo = hi - 1;
        const double span = cdf[hi] - cdf[lo];
        const double radius = span > 0.0 ? r[lo] + (r[hi] - r[lo]) * (u - cdf[lo]) / span : r[lo];
        out.row(i) = sphere_point(rng, sampler.dimension, std::max(radius, 0.0)).transpose();
    }
    return out;
}

BoundReport verify_bound(
    const OrbitSampler& sampler,
    const VectorFn& unitary_map,
    long n_samples,
    VarianceMode mode,
    int radii,
    int threads)
{
    sampler.validate();
    require(n_samples >= 1000, ErrorKind::argument, "verify_bound: need at least 1000 samples");
    BoundReport report;
    report.mode = mode;
    const BoundEstimate est = lower_bound_estimate(sampler, radius_grid(sampler, radii), n_samples, mode, threads);
    report.bound = est.value;
    report.mc_stderr = est.mc_stderr;
    report.warnings = est.warnings;

    const RealMatrix z = sample_points(sampler, n_samples, derive_seed(sampler.seed, "verify"));
    const int m = sampler.dimension;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const Eigen::VectorXd zi = z.row(i).transpose();
        const double e = (evaluate(unitary_map, zi, m, "verify_bound") - evaluate(sampler.target, zi, m, "verify_bound")).squaredNorm();
        sum += e;
        sum_sq += e * e;
    }
    const auto n = static_cast<double>(n_samples);
    report.empirical_error = sum / n;
    const double var = std::max(0.0, (sum_sq / n - report.empirical_error * report.empirical_error) * n / (n - 1.0));
    report.empirical_stderr = std::sqrt(var / n);
    const double combined = std::sqrt(report.empirical_stderr * report.empirical_stderr + report.mc_stderr * report.mc_stderr);
    report.satisfied = report.empirical_error >= report.bound - 3.0 * combined;
    return report;
}

std::string bound_report_to_json(const BoundReport& report)
{
    nlohmann::json j{
        {"empirical_error", report.empirical_error},
        {"empirical_stderr", report.empirical_stderr},
        {"bound", report.bound},
        {"mc_stderr", report.mc_stderr},
        {"satisfied", report.satisfied},
        {"variance_mode", to_string(report.mode)},
        {"warnings", report.warnings},
    };
    return j.dump(2);
}

RotationFit fit_rotation(const OrbitSampler& sampler, long batch, int steps, double lr, std::uint64_t seed)
{
    sampler.validate();
    require(batch >= 1 && steps >= 0 && lr > 0.0, ErrorKind::argument, "fit_rotation: need batch >= 1, steps >= 0, lr > 0");
    const int m = sampler.dimension;
    const RealMatrix z = sample_points(sampler, batch, derive_seed(seed, "fit_batch"));
    RealMatrix f(batch, m);
    for (long i = 0; i < batch; ++i) f.row(i) = evaluate(sampler.target, z.row(i).transpose(), m, "fit_rotation").transpose();

    Rng rng(derive_seed(seed, "fit_init"));
    std::normal_distribution<double> normal(0.0, 0.1);
    RealMatrix s0(m, m);
    for (Eigen::Index i = 0; i < s0.size(); ++i) s0(i) = normal(rng);
    Param<double> s("S", s0);
    const std::vector<Param<double>*> params{&s};
    AdamState<double> adam;
    RotationFit fit;
    auto record = [&](Tape<double>& tape) {
        const NodeId sn = tape.param(s);
        const NodeId u = tape.matrix_exp(tape.subtract(sn, tape.transpose_conj(sn)));
        // Rows are points, so z -> U z becomes Z U^T; U^T is again a rotation.
        const NodeId pred = tape.matmul(tape.constant(z), u);
        return tape.scalar_multiply(static_cast<double>(m), tape.mse(pred, tape.constant(f)));
    };
    for (int step = 0; step < steps; ++step) {
        Tape<double> tape;
        const NodeId loss = record(tape);
        s.zero_grad();
        tape.backward(loss);
        adam_step(params, adam, lr, 0.9, 0.999);
        ++fit.steps;
    }
    Tape<double> tape;
    fit.final_loss = tape.value(record(tape))(0, 0);
    const RealMatrix w = s.value - s.value.transpose();
    fit.rotation = mat_exp_reference(w).transpose();
    return fit;
}

VectorFn norm_matched_map(const VectorFn& f)
{
    return [f](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        const Eigen::VectorXd y = f(z);
        const double ny = y.norm();
        if (ny == 0.0) return z;
        return y * (z.norm() / ny);
    };
}

std::function<double(double)> make_radius_density(const std::string& name, int dimension, double r_min, double r_max)
{
    if (name == "disk") return [](double r) { return r >= 0.0 && r <= 1.0 ? 2.0 * r : 0.0; };
    if (name == "ball") {
        require(dimension >= 1, ErrorKind::config, "ball density: dimension must be >= 1");
        return [dimension](double r) { return r >= 0.0 && r <= 1.0 ? dimension * std::pow(r, dimension - 1) : 0.0; };
    }
    if (name == "uniform") {
        require(r_max > r_min, ErrorKind::config, "uniform density: need r_max > r_min");
        return [r_min, r_max](double r) { return r >= r_min && r <= r_max ? 1.0 / (r_max - r_min) : 0.0; };
    }
    fail(ErrorKind::config, "unknown radius density '" + name + "'");
}

VectorFn make_target(const std::string& name, int dimension, std::uint64_t seed)
{
    if (name == "unit_disk") {
        require(dimension == 2, ErrorKind::config, "unit_disk target needs dimension 2");
        return [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
            const double r = z.norm();
            const double t = std::atan2(z(1), z(0));
            Eigen::VectorXd y(2);
            y << std::sin(t) + r, std::cos(t) + r;
            return y;
        };
    }
    if (name == "scale2") return [](const Eigen::VectorXd& z) -> Eigen::VectorXd { return 2.0 * z; };
    if (name == "unitary") {
        Rng rng(derive_seed(seed, "unitary_target"));
        std::normal_distribution<double> normal(0.0, 1.0);
        RealMatrix s(dimension, dimension);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = normal(rng);
        const RealMatrix u = mat_exp_reference(RealMatrix(s - s.transpose()));
        return [u](const Eigen::VectorXd& z) -> Eigen::VectorXd { return u * z; };
    }
    if (name == "radial_rotation") {
        require(dimension % 2 == 0, ErrorKind::config, "radial_rotation target needs an even dimension");
        return [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
            const double a = z.norm();
            const double c = std::cos(a);
            const double s = std::sin(a);
            Eigen::VectorXd y(z.size());
            for (Eigen::Index i = 0; i + 1 < z.size(); i += 2) {
                y(i) = c * z(i) - s * z(i + 1);
                y(i + 1) = s * z(i) + c * z(i + 1);
            }
            return y;
        };
    }
    fail(ErrorKind::config, "unknown target '" + name + "'");
}

OrbitSampler unit_disk_sampler(std::uint64_t seed)
{
    OrbitSampler s;
    s.dimension = 2;
    s.radius_density = make_radius_density("disk", 2, 0.0, 1.0);
    s.r_min = 0.0;
    s.r_max = 1.0;
    s.target = make_target("unit_disk", 2, seed);
    s.seed = seed;
    return s;
}

} // namespace smoothdyn
