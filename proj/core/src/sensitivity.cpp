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

#include <smoothdyn/error.hpp>
#include <smoothdyn/graph.hpp>
#include <smoothdyn/metrics.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/sensitivity.hpp>

#include "parallel.hpp"

#include <cmath>
#include <map>
#include <ostream>

namespace smoothdyn {

void SensitivityConfig::validate() const
{
    data.validate();
    require(width >= 1, ErrorKind::config, "sensitivity: width must be >= 1");
    require(seeds >= 1, ErrorKind::config, "sensitivity: seeds must be >= 1");
    require(!t_max_values.empty(), ErrorKind::config, "sensitivity: t_max_values is empty");
    for (int t : t_max_values) require(t >= 1, ErrorKind::config, "sensitivity: t_max values must be >= 1");
    require(layer == LayerKind::lie_uni || layer == LayerKind::taylor_relaxed || layer == LayerKind::sep_uni
                || layer == LayerKind::gcn,
        ErrorKind::config, "sensitivity: layer must be lie_uni, taylor_relaxed, sep_uni or gcn");
    require(layer != LayerKind::sep_uni || scalar_kind == ScalarKind::complex128, ErrorKind::config,
        "sensitivity: sep_uni requires complex128 scalars");
}

ModelSpec sensitivity_model_spec(const SensitivityConfig& cfg, int t_max, int seed_index)
{
    ModelSpec spec;
    spec.name = "sensitivity";
    spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(seed_index));
    spec.scalar_kind = cfg.scalar_kind;
    spec.frame_width = 1;
    spec.layers.push_back({LayerKind::zero_pad, 1, cfg.width});
    LayerSpec l{cfg.layer, cfg.width, cfg.width};
    if (l.is_unitary_family()) l.t_max = t_max;
    if (l.kind == LayerKind::gcn) l.activation = Activation::identity;
    spec.layers.push_back(l);
    spec.validate();
    return spec;
}

namespace {

template <typename T>
std::vector<double> output_rqs(
    const ModelSpec& spec,
    const std::vector<HeatGridSample>& data,
    const std::vector<OperatorPtr>& ops,
    int threads)
{
    Model<T> model(spec);
    std::vector<double> out(data.size());
    detail::parallel_for(data.size(), threads, [&](std::size_t i) {
        Tape<T> tape;
        const NodeId x = tape.constant(to_scalar<T>(data[i].input));
        const NodeId y = model.forward(tape, x, ops[i]);
        out[i] = rayleigh_quotient_operator(*ops[i], tape.value(y));
    });
    return out;
}

} // namespace

SensitivityResult run_sensitivity(const SensitivityConfig& cfg)
{
    cfg.validate();
    HeatGridConfig data_cfg = cfg.data;
    if (data_cfg.threads == 0) data_cfg.threads = cfg.threads;
    return run_sensitivity(cfg, gen_heat_grid_dataset(data_cfg));
}

SensitivityResult run_sensitivity(const SensitivityConfig& cfg, const std::vector<HeatGridSample>& data)
{
    cfg.validate();
    require(!data.empty(), ErrorKind::argument, "sensitivity: empty dataset");

    std::map<std::pair<int, int>, OperatorPtr> cache;
    std::vector<OperatorPtr> ops;
    ops.reserve(data.size());
    std::vector<double> in_rq;
    in_rq.reserve(data.size());
    for (const auto& s : data) {
        auto& op = cache[{s.rows, s.cols}];
        if (!op) op = std::make_shared<const SparseOperator>(normalized_adjacency_sparse(grid_graph(s.rows, s.cols)));
        ops.push_back(op);
        in_rq.push_back(rayleigh_quotient_operator(*op, s.input));
    }
    const RqDistribution p = make_rq_distribution(in_rq);

    SensitivityResult result;
    for (double r : in_rq) result.mean_input_rq += r;
    result.mean_input_rq /= static_cast<double>(in_rq.size());

    for (int t_max : cfg.t_max_values) {
        SensitivityRow row;
        row.t_max = t_max;
        double rq_sum = 0.0;
        for (int s = 0; s < cfg.seeds; ++s) {
            const ModelSpec spec = sensitivity_model_spec(cfg, t_max, s);
            const std::vector<double> rq = cfg.scalar_kind == ScalarKind::complex128
                ? output_rqs<Complex>(spec, data, ops, cfg.threads)
                : output_rqs<double>(spec, data, ops, cfg.threads);
            for (double r : rq) rq_sum += r;
            row.kl_per_seed.push_back(kl_rq_distributions(p, make_rq_distribution(rq)));
        }
        for (double k : row.kl_per_seed) row.kl_mean += k;
        row.kl_mean /= cfg.seeds;
        for (double k : row.kl_per_seed) row.kl_std += (k - row.kl_mean) * (k - row.kl_mean);
        row.kl_std = cfg.seeds > 1 ? std::sqrt(row.kl_std / (cfg.seeds - 1)) : 0.0;
        row.mean_output_rq = rq_sum / (static_cast<double>(cfg.seeds) * static_cast<double>(data.size()));
        result.rows.push_back(std::move(row));
    }
    return result;
}

void write_sensitivity_csv(std::ostream& out, const SensitivityResult& result)
{
    out << "t_max,kl_mean,kl_std,mean_output_rq,mean_input_rq\n";
    out.precision(17);
    for (const auto& r : result.rows)
        out << r.t_max << ',' << r.kl_mean << ',' << r.kl_std << ',' << r.mean_output_rq << ','
            << result.mean_input_rq << '\n';
}

} // namespace smoothdyn
