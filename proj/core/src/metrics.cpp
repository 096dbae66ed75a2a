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

#include <smoothdyn/graph.hpp>
#include <smoothdyn/metrics.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

namespace smoothdyn {

namespace {

void require_same_shape(const Trajectory& pred, const Trajectory& target, const char* what)
{
    require(target.size() >= 1, ErrorKind::argument, std::string(what) + ": empty trajectory");
    require(
        pred.size() == target.size(),
        ErrorKind::dimension,
        std::string(what) + ": " + std::to_string(pred.size()) + " predicted frames vs " + std::to_string(target.size()) +
            " target frames");
    for (std::size_t t = 0; t < target.size(); ++t) {
        if (pred.frames[t].rows() != target.frames[t].rows() || pred.frames[t].cols() != target.frames[t].cols()) {
            fail(ErrorKind::dimension, std::string(what) + ": frame " + std::to_string(t) + " shapes differ");
        }
    }
}

} // namespace

double mean_rayleigh_quotient(const std::vector<RealMatrix>& frames, const SparseOperator& a_norm)
{
    require(!frames.empty(), ErrorKind::argument, "mean_rayleigh_quotient: no frames");
    double sum = 0.0;
    for (const RealMatrix& f : frames) sum += rayleigh_quotient_operator(a_norm, f);
    return sum / static_cast<double>(frames.size());
}

double mre(
    const std::vector<RealMatrix>& preds,
    const std::vector<RealMatrix>& targets,
    const std::vector<const SparseOperator*>& ops)
{
    require(!preds.empty(), ErrorKind::argument, "mre: empty input");
    require(
        preds.size() == targets.size() && ops.size() == preds.size(),
        ErrorKind::dimension,
        "mre: predictions, targets and operators differ in count");
    double p = 0.0;
    double t = 0.0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        p += rayleigh_quotient_operator(*ops[k], preds[k]);
        t += rayleigh_quotient_operator(*ops[k], targets[k]);
    }
    const auto n = static_cast<double>(preds.size());
    return std::abs(p / n - t / n);
}

double mre(const std::vector<RealMatrix>& preds, const std::vector<RealMatrix>& targets, const SparseOperator& a_norm)
{
    return mre(preds, targets, std::vector<const SparseOperator*>(preds.size(), &a_norm));
}

RayleighErrorResult rayleigh_error(const Trajectory& pred, const Trajectory& target, const SparseOperator& a_norm)
{
    require_same_shape(pred, target, "rayleigh_error");
    RayleighErrorResult out;
    double sum = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        if (pred.frames[t].squaredNorm() == 0.0 || target.frames[t].squaredNorm() == 0.0) {
            ++out.skipped;
            continue;
        }
        const double e = std::abs(
            rayleigh_quotient_operator(a_norm, target.frames[t]) - rayleigh_quotient_operator(a_norm, pred.frames[t]));
        out.per_frame.push_back(e);
        sum += e;
    }
    require(!out.per_frame.empty(), ErrorKind::undefined, "rayleigh_error: every frame has zero features");
    out.value = sum / static_cast<double>(out.per_frame.size());
    return out;
}

double nrmse(const Trajectory& pred, const Trajectory& target)
{
    require_same_shape(pred, target, "nrmse");
    double sum = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        const double energy = target.frames[t].squaredNorm();
        require(energy > 0.0, ErrorKind::undefined, "nrmse: target frame " + std::to_string(t) + " has zero energy");
        sum += std::sqrt((pred.frames[t] - target.frames[t]).squaredNorm() / energy);
    }
    return sum / static_cast<double>(target.size());
}

double smape(const Trajectory& pred, const Trajectory& target, double eps)
{
    require_same_shape(pred, target, "smape");
    double sum = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        const auto& y = target.frames[t].array();
        const auto& f = pred.frames[t].array();
        sum += (2.0 * (y - f).abs() / (y.abs() + f.abs() + eps)).mean();
    }
    return sum / static_cast<double>(target.size());
}

RqDistribution make_rq_distribution(std::vector<double> samples, int bins)
{
    require(bins >= 1, ErrorKind::argument, "rq distribution: bins must be >= 1");
    constexpr double lo = 0.0;
    constexpr double hi = 2.0;
    constexpr double slack = 1e-9;
    RqDistribution d;
    d.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int k = 0; k <= bins; ++k) d.bin_edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
    d.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double& s : samples) {
        if (!(s >= lo - slack && s <= hi + slack)) {
            fail(ErrorKind::argument, "rq distribution: sample " + std::to_string(s) + " outside [0, 2]");
        }
        s = std::clamp(s, lo, hi);
        const int k = std::min(bins - 1, static_cast<int>((s - lo) / (hi - lo) * bins));
        ++d.counts[static_cast<std::size_t>(k)];
    }
    d.samples = std::move(samples);
    return d;
}

double kl_rq_distributions(const RqDistribution& p, const RqDistribution& q, int bins)
{
    require(!p.samples.empty() && !q.samples.empty(), ErrorKind::argument, "kl: both distributions must be nonempty");
    const RqDistribution hp = p.counts.size() == static_cast<std::size_t>(bins) ? p : make_rq_distribution(p.samples, bins);
    const RqDistribution hq = q.counts.size() == static_cast<std::size_t>(bins) ? q : make_rq_distribution(q.samples, bins);
    const double np = static_cast<double>(hp.samples.size()) + bins;
    const double nq = static_cast<double>(hq.samples.size()) + bins;
    double kl = 0.0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(bins); ++k) {
        const double pk = (static_cast<double>(hp.counts[k]) + 1.0) / np;
        const double qk = (static_cast<double>(hq.counts[k]) + 1.0) / nq;
        kl += pk * std::log(pk / qk);
    }
    return std::max(kl, 0.0);
}

CorrelationEstimate two_point_correlation(
    const RealMatrix& positions,
    const RealMatrix& values,
    const std::vector<double>& r_edges)
{
    const Eigen::Index n = positions.rows();
    require(n >= 2, ErrorKind::argument, "two_point_correlation: need at least 2 points");
    require(values.rows() == n, ErrorKind::dimension, "two_point_correlation: values and positions differ in rows");
    require(r_edges.size() >= 2, ErrorKind::argument, "two_point_correlation: need at least one bin");
    for (std::size_t k = 0; k + 1 < r_edges.size(); ++k) {
        require(r_edges[k] < r_edges[k + 1] && r_edges[k] >= 0.0, ErrorKind::argument, "two_point_correlation: r_edges must be increasing and >= 0");
    }
    const std::size_t bins = r_edges.size() - 1;
    const double r_max = r_edges.back();
    const Eigen::Index dim = positions.cols();
    require(dim >= 1 && dim <= 3, ErrorKind::dimension, "two_point_correlation: positions must have 1 to 3 columns");

    // Uniform cell grid of width r_max; neighbours of i come from adjacent cells.
    using Cell = std::array<long, 3>;
    struct CellHash
    {
        std::size_t operator()(const Cell& c) const
        {
            std::size_t h = 1469598103934665603ull;
            for (long v : c) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
            return h;
        }
    };
    auto cell_of = [&](Eigen::Index i) {
        Cell c{0, 0, 0};
        for (Eigen::Index d = 0; d < dim; ++d) c[static_cast<std::size_t>(d)] = static_cast<long>(std::floor(positions(i, d) / r_max));
        return c;
    };
    std::unordered_map<Cell, std::vector<Eigen::Index>, CellHash> grid;
    for (Eigen::Index i = 0; i < n; ++i) grid[cell_of(i)].push_back(i);

    std::vector<double> sums(bins, 0.0);
    CorrelationEstimate est;
    est.r_edges = r_edges;
    est.pair_counts.assign(bins, 0);
    std::vector<Eigen::Index> neighbours;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Cell c = cell_of(i);
        neighbours.clear();
        const long span = 1;
        for (long dx = -span; dx <= span; ++dx)
            for (long dy = (dim >= 2 ? -span : 0); dy <= (dim >= 2 ? span : 0); ++dy)
                for (long dz = (dim >= 3 ? -span : 0); dz <= (dim >= 3 ? span : 0); ++dz) {
                    const auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == grid.end()) continue;
                    for (Eigen::Index j : it->second)
                        if (j > i) neighbours.push_back(j);
                }
        // Ascending j keeps the accumulation order of the all-pairs loop.
        std::sort(neighbours.begin(), neighbours.end());
        for (Eigen::Index j : neighbours) {
            const double r = (positions.row(i) - positions.row(j)).norm();
            if (r < r_edges.front() || r >= r_max) continue;
            const auto k = static_cast<std::size_t>(std::upper_bound(r_edges.begin(), r_edges.end(), r) - r_edges.begin()) - 1;
            sums[k] += values.row(i).dot(values.row(j));
            ++est.pair_counts[k];
        }
    }
    est.xi.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.xi[k] = est.pair_counts[k] > 0 ? sums[k] / static_cast<double>(est.pair_counts[k])
                                           : std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

SmoothErrorResult err_smooth(
    const std::vector<RealMatrix>& positions,
    const std::vector<Trajectory>& preds,
    const std::vector<Trajectory>& targets,
    const std::vector<double>& r_edges)
{
    require(!targets.empty(), ErrorKind::argument, "err_smooth: no meshes");
    require(
        positions.size() == targets.size() && preds.size() == targets.size(),
        ErrorKind::dimension,
        "err_smooth: positions, predictions and targets differ in count");
    SmoothErrorResult out;
    double mesh_sum = 0.0;
    std::size_t meshes_used = 0;
    for (std::size_t m = 0; m < targets.size(); ++m) {
        require_same_shape(preds[m], targets[m], "err_smooth");
        double frame_sum = 0.0;
        std::size_t frames_used = 0;
        for (std::size_t t = 0; t < targets[m].size(); ++t) {
            const CorrelationEstimate a = two_point_correlation(positions[m], targets[m].frames[t], r_edges);
            const CorrelationEstimate b = two_point_correlation(positions[m], preds[m].frames[t], r_edges);
            double bin_sum = 0.0;
            std::size_t bins_used = 0;
            for (std::size_t k = 0; k < a.xi.size(); ++k) {
                if (!a.occupied(k) || !b.occupied(k)) {
                    ++out.excluded_bins;
                    continue;
                }
                bin_sum += std::abs(a.xi[k] - b.xi[k]);
                ++bins_used;
            }
            if (bins_used == 0) continue;
            out.used_terms += bins_used;
            frame_sum += bin_sum / static_cast<double>(bins_used);
            ++frames_used;
        }
        if (frames_used == 0) continue;
        mesh_sum += frame_sum / static_cast<double>(frames_used);
        ++meshes_used;
    }
    require(meshes_used > 0, ErrorKind::undefined, "err_smooth: every correlation bin is empty");
    out.value = mesh_sum / static_cast<double>(meshes_used);
    return out;
}

std::vector<double> lat_weights(const std::vector<double>& lat_edges_deg)
{
    require(lat_edges_deg.size() >= 2, ErrorKind::argument, "lat_weights: need at least one latitude band");
    const double deg = std::acos(-1.0) / 180.0;
    std::vector<double> w(lat_edges_deg.size() - 1);
    double mean = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double lo = std::min(lat_edges_deg[i], lat_edges_deg[i + 1]);
        const double hi = std::max(lat_edges_deg[i], lat_edges_deg[i + 1]);
        require(lo >= -90.0 && hi <= 90.0 && hi > lo, ErrorKind::argument, "lat_weights: bands must be nonempty within [-90, 90]");
        w[i] = std::sin(hi * deg) - std::sin(lo * deg);
        mean += w[i];
    }
    mean /= static_cast<double>(w.size());
    for (double& x : w) x /= mean;
    return w;
}

namespace {

void check_lead_fields(const LeadFields& a, const LeadFields& b, const std::vector<double>& w, const char* what)
{
    require(!a.empty(), ErrorKind::argument, std::string(what) + ": no lead times");
    require(a.size() == b.size(), ErrorKind::dimension, std::string(what) + ": lead counts differ");
    for (std::size_t l = 0; l < a.size(); ++l) {
        require(!a[l].empty() && a[l].size() == b[l].size(), ErrorKind::dimension, std::string(what) + ": time counts differ");
        for (std::size_t t = 0; t < a[l].size(); ++t) {
            require(
                a[l][t].rows() == b[l][t].rows() && a[l][t].cols() == b[l][t].cols() &&
                    a[l][t].rows() == static_cast<Eigen::Index>(w.size()),
                ErrorKind::dimension,
                std::string(what) + ": field shapes do not conform to the latitude weights");
        }
    }
}

Eigen::VectorXd weight_vector(const std::vector<double>& w)
{
    return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

} // namespace

std::vector<double> rmse_lat(const LeadFields& forecast, const LeadFields& observed, const std::vector<double>& w)
{
    check_lead_fields(forecast, observed, w, "rmse_lat");
    const Eigen::VectorXd wv = weight_vector(w);
    std::vector<double> out;
    for (std::size_t l = 0; l < forecast.size(); ++l) {
        double sum = 0.0;
        double count = 0.0;
        for (std::size_t t = 0; t < forecast[l].size(); ++t) {
            const RealMatrix d = forecast[l][t] - observed[l][t];
            sum += (d.array().square().colwise() * wv.array()).sum();
            count += static_cast<double>(d.size());
        }
        out.push_back(std::sqrt(sum / count));
    }
    return out;
}

std::vector<double> acc_lat(
    const LeadFields& forecast,
    const LeadFields& observed,
    const LeadFields& climatology,
    const std::vector<double>& w)
{
    check_lead_fields(forecast, observed, w, "acc_lat");
    check_lead_fields(forecast, climatology, w, "acc_lat");
    const Eigen::VectorXd wv = weight_vector(w);
    std::vector<double> out;
    for (std::size_t l = 0; l < forecast.size(); ++l) {
        double sum = 0.0;
        for (std::size_t t = 0; t < forecast[l].size(); ++t) {
            const RealMatrix fa = forecast[l][t] - climatology[l][t];
            const RealMatrix oa = observed[l][t] - climatology[l][t];
            const double num = ((fa.array() * oa.array()).colwise() * wv.array()).sum();
            const double ff = (fa.array().square().colwise() * wv.array()).sum();
            const double oo = (oa.array().square().colwise() * wv.array()).sum();
            require(ff > 0.0 && oo > 0.0, ErrorKind::undefined, "acc_lat: zero anomaly field at lead " + std::to_string(l));
            sum += num / std::sqrt(ff * oo);
        }
        out.push_back(sum / static_cast<double>(forecast[l].size()));
    }
    return out;
}

void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows)
{
    out << "run_id,mesh_id,metric,value\n";
    const auto old = out.precision(17);
    for (const MetricRow& r : rows) out << r.run_id << ',' << r.mesh_id << ',' << r.metric << ',' << r.value << '\n';
    out.precision(old);
}

std::string metric_summary_json(const std::vector<MetricRow>& rows, const std::string& metadata_json)
{
    using nlohmann::json;
    json meta;
    try {
        meta = json::parse(metadata_json);
    } catch (const json::exception& e) {
        fail(ErrorKind::argument, std::string("metric summary metadata: ") + e.what());
    }
    require(meta.is_object(), ErrorKind::argument, "metric summary metadata must be a JSON object");
    json jr = json::array();
    std::map<std::string, std::pair<double, int>> totals;
    for (const MetricRow& r : rows) {
        jr.push_back({{"run_id", r.run_id}, {"mesh_id", r.mesh_id}, {"metric", r.metric}, {"value", r.value}});
        auto& [sum, count] = totals[r.metric];
        sum += r.value;
        ++count;
    }
    json summary = json::object();
    for (const auto& [metric, acc] : totals) summary[metric] = acc.first / acc.second;
    return json{{"rows", jr}, {"summary", summary}, {"metadata", meta}}.dump(2);
}

} // namespace smoothdyn
