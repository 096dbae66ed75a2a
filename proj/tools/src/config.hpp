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

#include <smoothdyn/bound.hpp>
#include <smoothdyn/dataset.hpp>
#include <smoothdyn/model.hpp>
#include <smoothdyn/sensitivity.hpp>
#include <smoothdyn/train.hpp>

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace smoothdyn::cli {

using json = nlohmann::json;

/// Rejects keys outside `allowed`.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where);

template <typename V>
V get_or(const json& j, const char* key, V fallback, const std::string& where)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<V>();
    } catch (const json::exception& e) {
        fail(ErrorKind::config, where + ": bad value for '" + key + "': " + e.what());
    }
}

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

HeatGridConfig heat_grid_from_json(const json& j, const std::string& where);
json heat_grid_to_json(const HeatGridConfig& c);

PdeParams pde_from_json(const json& j, const std::string& where);
json pde_to_json(const PdeParams& p);

TrainConfig train_config_from_json(const json& j, const std::string& where);
json train_config_to_json(const TrainConfig& c);

/// A mesh built from a named shape or loaded from a file.
struct MeshSource
{
    std::string name;
    std::string shape = "icosphere";
    int subdivisions = 2;
    double radius = 1.0;
    double amplitude = 0.1;
    double a = 1.0, b = 1.0, c = 1.0;
    double major_radius = 1.0, minor_radius = 0.4;
    int nu = 32, nv = 16;
    std::uint64_t seed = 0;
    std::string path;
};

MeshSource mesh_source_from_json(const json& j, const std::string& where);
json mesh_source_to_json(const MeshSource& m);
TriMesh build_mesh(const MeshSource& m);

struct GenDataConfig
{
    std::string kind = "heat_grid";
    std::uint64_t seed = 0;
    HeatGridConfig heat_grid;
    std::vector<MeshSource> meshes;
    PdeParams pde;
    int initial_conditions = 3;
    bool rewire = true;
};

GenDataConfig gen_data_config_from_json(const json& j);
json gen_data_config_to_json(const GenDataConfig& c);

/// Named architecture with its size arguments.
struct ModelPreset
{
    std::string name = "r_unigraph";
    int d_in = 1;
    int hidden = 16;
    int layers = 4;
    int t_max = 3;
    int d_out = 1;
    std::string decoder = "mlp_sin";
    int decoder_hidden = 16;
    bool residual = false;
};

ModelSpec model_from_preset(const ModelPreset& p, std::uint64_t seed);

struct TrainRunConfig
{
    std::uint64_t seed = 0;
    std::optional<ModelPreset> preset;
    std::optional<ModelSpec> model;
    TrainConfig train;
    std::vector<double> lr_sweep;

    /// Model seed derive_seed(seed, "model"); the explicit spec wins over the preset.
    ModelSpec resolved_model() const;
};

TrainRunConfig train_run_config_from_json(const json& j);
json train_run_config_to_json(const TrainRunConfig& c);

struct SensitivityRunConfig
{
    SensitivityConfig sweep;
};

SensitivityRunConfig sensitivity_config_from_json(const json& j);
json sensitivity_config_to_json(const SensitivityRunConfig& c);

struct BoundRunConfig
{
    std::uint64_t seed = 0;
    std::string target = "unit_disk";
    int dimension = 2;
    std::string density = "disk";
    double r_min = 0.0;
    double r_max = 1.0;
    long samples = 1000000;
    int radii = 200;
    VarianceMode mode = VarianceMode::norm;
    /// "fit_rotation", "norm_matched" or "none".
    std::string unitary = "fit_rotation";
    long fit_batch = 4096;
    int fit_steps = 300;
    double fit_lr = 0.05;
    long eval_samples = 200000;

    OrbitSampler sampler() const;
};

BoundRunConfig bound_config_from_json(const json& j);
json bound_config_to_json(const BoundRunConfig& c);

} // namespace smoothdyn::cli
