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

#include <smoothdyn/dynamics.hpp>
#include <smoothdyn/linalg.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace smoothdyn {

/// Mean Rayleigh quotient of `frames` under `a_norm`.
double mean_rayleigh_quotient(const std::vector<RealMatrix>& frames, const SparseOperator& a_norm);

/// |mean RQ(preds) - mean RQ(targets)|; preds[k] and targets[k] live on ops[k].
double mre(
    const std::vector<RealMatrix>& preds,
    const std::vector<RealMatrix>& targets,
    const std::vector<const SparseOperator*>& ops);
double mre(const std::vector<RealMatrix>& preds, const std::vector<RealMatrix>& targets, const SparseOperator& a_norm);

struct RayleighErrorResult
{
    double value = 0.0;
    std::vector<double> per_frame;
    /// Frames skipped because either side had zero features.
    std::size_t skipped = 0;
};

/// (1/T) sum_t |R(Y_t) - R(pred_t)|.
RayleighErrorResult rayleigh_error(const Trajectory& pred, const Trajectory& target, const SparseOperator& a_norm);

/// (1/T) sum_t sqrt(mean (pred - Y)^2 / mean Y^2). Zero-energy target frames are
/// undefined errors.
double nrmse(const Trajectory& pred, const Trajectory& target);

inline constexpr double k_smape_epsilon = 1e-8;

/// (1/T) sum_t (1/n) sum_i 2 |Y - pred| / (|Y| + |pred| + eps).
double smape(const Trajectory& pred, const Trajectory& target, double eps = k_smape_epsilon);

struct RqDistribution
{
    std::vector<double> samples;
    std::vector<double> bin_edges;
    std::vector<long> counts;
};

inline constexpr int k_rq_bins = 50;

/// Histogram over [0, 2]. Samples within 1e-9 outside the range are clamped;
/// anything further out is an argument error.
RqDistribution make_rq_distribution(std::vector<double> samples, int bins = k_rq_bins);

/// sum_k p_k log(p_k / q_k) of the histograms with one pseudo-count per bin.
double kl_rq_distributions(const RqDistribution& p, const RqDistribution& q, int bins = k_rq_bins);

struct CorrelationEstimate
{
    std::vector<double> r_edges;
    /// NaN where no pair fell into the bin.
    std::vector<double> xi;
    std::vector<long> pair_counts;

    bool occupied(std::size_t bin) const { return pair_counts[bin] > 0; }
};

/// xi(r_k) = mean over unordered point pairs with |x_i - x_j| in [r_k, r_{k+1})
/// of <delta_i, delta_j>. Pairs are found with a uniform cell grid.
CorrelationEstimate two_point_correlation(
    const RealMatrix& positions,
    const RealMatrix& values,
    const std::vector<double>& r_edges);

struct SmoothErrorResult
{
    double value = 0.0;
    /// (mesh, frame, bin) terms dropped because a bin was empty on either side.
    std::size_t excluded_bins = 0;
    std::size_t used_terms = 0;
};

/// Mean over meshes, frames and bins of |xi_target - xi_pred|.
SmoothErrorResult err_smooth(
    const std::vector<RealMatrix>& positions,
    const std::vector<Trajectory>& preds,
    const std::vector<Trajectory>& targets,
    const std::vector<double>& r_edges);

/// Latitude weights from band edges (degrees, I + 1 values), normalized to
/// mean 1.
std::vector<double> lat_weights(const std::vector<double>& lat_edges_deg);

/// Fields indexed [lead][time], each I x J (latitude by longitude).
using LeadFields = std::vector<std::vector<RealMatrix>>;

/// Per-lead sqrt((1/TIJ) sum w_i (f - o)^2).
std::vector<double> rmse_lat(const LeadFields& forecast, const LeadFields& observed, const std::vector<double>& w);

/// Per-lead mean over time of the weighted Pearson correlation of anomalies
/// f - c and o - c.
std::vector<double> acc_lat(
    const LeadFields& forecast,
    const LeadFields& observed,
    const LeadFields& climatology,
    const std::vector<double>& w);

struct MetricRow
{
    std::string run_id;
    std::string mesh_id;
    std::string metric;
    double value = 0.0;
};

void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows);

/// {"rows": [...], "summary": {metric: mean}, "metadata": {...}}; `metadata_json`
/// must be a JSON object.
std::string metric_summary_json(const std::vector<MetricRow>& rows, const std::string& metadata_json = "{}");

} // namespace smoothdyn
