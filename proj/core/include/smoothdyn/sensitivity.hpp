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

#include <smoothdyn/dataset.hpp>
#include <smoothdyn/model.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace smoothdyn {

/// KL divergence between the Rayleigh quotients of the inputs and of one freshly
/// initialized exponential layer's outputs, swept over the truncation order.
struct SensitivityConfig
{
    HeatGridConfig data;
    /// lie_uni, taylor_relaxed, sep_uni (complex only) or gcn.
    LayerKind layer = LayerKind::lie_uni;
    int width = 8;
    ScalarKind scalar_kind = ScalarKind::real64;
    std::vector<int> t_max_values{1, 2, 3, 5, 7, 10};
    int seeds = 10;
    std::uint64_t seed = 0;
    int threads = 0;

    void validate() const;
};

struct SensitivityRow
{
    int t_max = 0;
    double kl_mean = 0.0;
    double kl_std = 0.0;
    double mean_output_rq = 0.0;
    std::vector<double> kl_per_seed;
};

struct SensitivityResult
{
    double mean_input_rq = 0.0;
    std::vector<SensitivityRow> rows;
};

/// Generates the dataset from cfg.data, then runs the sweep.
SensitivityResult run_sensitivity(const SensitivityConfig& cfg);
SensitivityResult run_sensitivity(const SensitivityConfig& cfg, const std::vector<HeatGridSample>& data);

/// Layer `seed_index` of the sweep: zero_pad(1 -> width) then one layer of
/// cfg.layer. Parameters depend on the seed index only, not on t_max.
ModelSpec sensitivity_model_spec(const SensitivityConfig& cfg, int t_max, int seed_index);

/// Header: t_max,kl_mean,kl_std,mean_output_rq,mean_input_rq
void write_sensitivity_csv(std::ostream& out, const SensitivityResult& result);

} // namespace smoothdyn
