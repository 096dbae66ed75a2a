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

#include "config.hpp"

#include <smoothdyn/mesh_io.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/shapes.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace smoothdyn::cli {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    require(j.is_object(), ErrorKind::config, where + ": expected an object");
    for (const auto& [key, _] : j.items())
        require(allowed.count(key) != 0, ErrorKind::config, where + ": unknown key '" + key + "'");
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::io, path + ": cannot write");
    out << text;
    require(static_cast<bool>(out), ErrorKind::io, path + ": write failed");
}

namespace {

LaplacianKind laplacian_from_string(const std::string& s, const std::string& where)
{
    if (s == "normalized") return LaplacianKind::normalized;
    if (s == "combinatorial") return LaplacianKind::combinatorial;
    fail(ErrorKind::config, where + ": laplacian must be 'normalized' or 'combinatorial'");
}

} // namespace

HeatGridConfig heat_grid_from_json(const json& j, const std::string& where)
{
    check_keys(j,
        {"count", "sources", "seed", "side_mean", "side_std", "side_min", "tau", "t_end", "dt", "input_time",
            "target_time", "laplacian", "keep_trajectories"},
        where);
    HeatGridConfig c;
    c.count = get_or(j, "count", c.count, where);
    c.sources = get_or(j, "sources", c.sources, where);
    c.seed = get_or(j, "seed", c.seed, where);
    c.side_mean = get_or(j, "side_mean", c.side_mean, where);
    c.side_std = get_or(j, "side_std", c.side_std, where);
    c.side_min = get_or(j, "side_min", c.side_min, where);
    c.tau = get_or(j, "tau", c.tau, where);
    c.t_end = get_or(j, "t_end", c.t_end, where);
    c.dt = get_or(j, "dt", c.dt, where);
    c.input_time = get_or(j, "input_time", c.input_time, where);
    c.target_time = get_or(j, "target_time", c.target_time, where);
    c.laplacian = laplacian_from_string(get_or<std::string>(j, "laplacian", "normalized", where), where);
    c.keep_trajectories = get_or(j, "keep_trajectories", c.keep_trajectories, where);
    try {
        c.validate();
    } catch (const Error& e) {
        fail(ErrorKind::config, where + ": " + e.what());
    }
    return c;
}

json heat_grid_to_json(const HeatGridConfig& c)
{
    return json{{"count", c.count}, {"sources", c.sources}, {"seed", c.seed}, {"side_mean", c.side_mean},
        {"side_std", c.side_std}, {"side_min", c.side_min}, {"tau", c.tau}, {"t_end", c.t_end}, {"dt", c.dt},
        {"input_time", c.input_time}, {"target_time", c.target_time},
        {"laplacian", c.laplacian == LaplacianKind::normalized ? "normalized" : "combinatorial"},
        {"keep_trajectories", c.keep_trajectories}};
}

PdeParams pde_from_json(const json& j, const std::string& where)
{
    check_keys(j, {"kind", "tau", "alpha", "c", "mobility", "lambda", "dt", "steps"}, where);
    PdeParams p;
    p.kind = pde_kind_from_string(get_or<std::string>(j, "kind", "heat_mesh", where));
    p.tau = get_or(j, "tau", p.tau, where);
    p.alpha = get_or(j, "alpha", p.alpha, where);
    p.c = get_or(j, "c", p.c, where);
    p.mobility = get_or(j, "mobility", p.mobility, where);
    p.lambda = get_or(j, "lambda", p.lambda, where);
    p.dt = get_or(j, "dt", p.dt, where);
    p.steps = get_or(j, "steps", p.steps, where);
    try {
        p.validate();
    } catch (const Error& e) {
        fail(ErrorKind::config, where + ": " + e.what());
    }
    return p;
}

json pde_to_json(const PdeParams& p)
{
    return json{{"kind", to_string(p.kind)}, {"tau", p.tau}, {"alpha", p.alpha}, {"c", p.c},
        {"mobility", p.mobility}, {"lambda", p.lambda}, {"dt", p.dt}, {"steps", p.steps}};
}

TrainConfig train_config_from_json(const json& j, const std::string& where)
{
    check_keys(j,
        {"lr", "beta1", "beta2", "epochs", "batch_size", "bptt_rollout", "input_window", "grad_clip", "val_fraction",
            "windows_per_epoch"},
        where);
    TrainConfig c;
    c.lr = get_or(j, "lr", c.lr, where);
    c.beta1 = get_or(j, "beta1", c.beta1, where);
    c.beta2 = get_or(j, "beta2", c.beta2, where);
    c.epochs = get_or(j, "epochs", c.epochs, where);
    c.batch_size = get_or(j, "batch_size", c.batch_size, where);
    c.bptt_rollout = get_or(j, "bptt_rollout", c.bptt_rollout, where);
    c.input_window = get_or(j, "input_window", c.input_window, where);
    if (j.contains("grad_clip")) {
        if (j.at("grad_clip").is_null())
            c.grad_clip.reset();
        else
            c.grad_clip = get_or<double>(j, "grad_clip", 1.0, where);
    }
    c.val_fraction = get_or(j, "val_fraction", c.val_fraction, where);
    c.windows_per_epoch = get_or(j, "windows_per_epoch", c.windows_per_epoch, where);
    c.validate();
    return c;
}

json train_config_to_json(const TrainConfig& c)
{
    return json{{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epochs", c.epochs},
        {"batch_size", c.batch_size}, {"bptt_rollout", c.bptt_rollout}, {"input_window", c.input_window},
        {"grad_clip", c.grad_clip ? json(*c.grad_clip) : json(nullptr)}, {"val_fraction", c.val_fraction},
        {"windows_per_epoch", c.windows_per_epoch}};
}

MeshSource mesh_source_from_json(const json& j, const std::string& where)
{
    check_keys(j,
        {"name", "shape", "subdivisions", "radius", "amplitude", "a", "b", "c", "major_radius", "minor_radius", "nu",
            "nv", "seed", "path"},
        where);
    MeshSource m;
    m.shape = get_or(j, "shape", m.shape, where);
    m.name = get_or(j, "name", m.shape, where);
    m.subdivisions = get_or(j, "subdivisions", m.subdivisions, where);
    m.radius = get_or(j, "radius", m.radius, where);
    m.amplitude = get_or(j, "amplitude", m.amplitude, where);
    m.a = get_or(j, "a", m.a, where);
    m.b = get_or(j, "b", m.b, where);
    m.c = get_or(j, "c", m.c, where);
    m.major_radius = get_or(j, "major_radius", m.major_radius, where);
    m.minor_radius = get_or(j, "minor_radius", m.minor_radius, where);
    m.nu = get_or(j, "nu", m.nu, where);
    m.nv = get_or(j, "nv", m.nv, where);
    m.seed = get_or(j, "seed", m.seed, where);
    m.path = get_or(j, "path", m.path, where);
    static const std::set<std::string> shapes{
        "icosphere", "torus", "perturbed_icosphere", "bumpy_sphere", "ellipsoid", "file"};
    require(shapes.count(m.shape) != 0, ErrorKind::config, where + ": unknown shape '" + m.shape + "'");
    require(m.shape != "file" || !m.path.empty(), ErrorKind::config, where + ": shape 'file' needs 'path'");
    require(!m.name.empty() && m.name.find('/') == std::string::npos, ErrorKind::config,
        where + ": name must be a nonempty file stem");
    return m;
}

json mesh_source_to_json(const MeshSource& m)
{
    json j{{"name", m.name}, {"shape", m.shape}};
    if (m.shape == "file") {
        j["path"] = m.path;
    } else if (m.shape == "torus") {
        j.update({{"major_radius", m.major_radius}, {"minor_radius", m.minor_radius}, {"nu", m.nu}, {"nv", m.nv}});
    } else if (m.shape == "ellipsoid") {
        j.update({{"subdivisions", m.subdivisions}, {"a", m.a}, {"b", m.b}, {"c", m.c}});
    } else if (m.shape == "icosphere") {
        j.update({{"subdivisions", m.subdivisions}, {"radius", m.radius}});
    } else {
        j.update({{"subdivisions", m.subdivisions}, {"amplitude", m.amplitude}, {"seed", m.seed}});
    }
    return j;
}

TriMesh build_mesh(const MeshSource& m)
{
    if (m.shape == "icosphere") return icosphere(m.subdivisions, m.radius);
    if (m.shape == "torus") return torus(m.major_radius, m.minor_radius, m.nu, m.nv);
    if (m.shape == "perturbed_icosphere") return perturbed_icosphere(m.subdivisions, m.amplitude, m.seed);
    if (m.shape == "bumpy_sphere") return bumpy_sphere(m.subdivisions, m.amplitude, m.seed);
    if (m.shape == "ellipsoid") return ellipsoid(m.subdivisions, m.a, m.b, m.c);
    return load_mesh(m.path);
}

GenDataConfig gen_data_config_from_json(const json& j)
{
    const std::string where = "gen-data config";
    check_keys(j, {"kind", "seed", "heat_grid", "meshes", "pde", "initial_conditions", "rewire"}, where);
    GenDataConfig c;
    c.kind = get_or(j, "kind", c.kind, where);
    c.seed = get_or(j, "seed", c.seed, where);
    if (c.kind == "heat_grid") {
        for (const char* k : {"meshes", "pde", "initial_conditions", "rewire"})
            require(!j.contains(k), ErrorKind::config, where + ": '" + k + "' is only valid for kind mesh_pde");
        const json h = j.value("heat_grid", json::object());
        require(!h.contains("seed"), ErrorKind::config, where + ".heat_grid: the seed comes from the top-level 'seed'");
        c.heat_grid = heat_grid_from_json(h, where + ".heat_grid");
        c.heat_grid.seed = derive_seed(c.seed, "heat_grid");
    } else if (c.kind == "mesh_pde") {
        require(!j.contains("heat_grid"), ErrorKind::config, where + ": 'heat_grid' is only valid for kind heat_grid");
        require(j.contains("meshes") && j.at("meshes").is_array() && !j.at("meshes").empty(), ErrorKind::config,
            where + ": mesh_pde needs a nonempty 'meshes' array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < j.at("meshes").size(); ++i) {
            c.meshes.push_back(mesh_source_from_json(j.at("meshes")[i], where + ".meshes[" + std::to_string(i) + "]"));
            require(names.insert(c.meshes.back().name).second, ErrorKind::config,
                where + ": duplicate mesh name '" + c.meshes.back().name + "'");
        }
        c.pde = pde_from_json(j.value("pde", json::object()), where + ".pde");
        require(c.pde.kind != PdeKind::heat_graph, ErrorKind::config, where + ": pde.kind must be a mesh PDE");
        c.initial_conditions = get_or(j, "initial_conditions", c.initial_conditions, where);
        require(c.initial_conditions >= 1, ErrorKind::config, where + ": initial_conditions must be >= 1");
        c.rewire = get_or(j, "rewire", c.rewire, where);
    } else {
        fail(ErrorKind::config, where + ": kind must be 'heat_grid' or 'mesh_pde'");
    }
    return c;
}

json gen_data_config_to_json(const GenDataConfig& c)
{
    json j{{"kind", c.kind}, {"seed", c.seed}};
    if (c.kind == "heat_grid") {
        json h = heat_grid_to_json(c.heat_grid);
        h.erase("seed");
        j["heat_grid"] = h;
    } else {
        j["meshes"] = json::array();
        for (const auto& m : c.meshes) j["meshes"].push_back(mesh_source_to_json(m));
        j["pde"] = pde_to_json(c.pde);
        j["initial_conditions"] = c.initial_conditions;
        j["rewire"] = c.rewire;
    }
    return j;
}

ModelSpec model_from_preset(const ModelPreset& p, std::uint64_t seed)
{
    ModelSpec spec;
    if (p.name == "r_unigraph")
        spec = r_unigraph_spec(p.d_in, p.hidden, p.layers, p.t_max, p.d_out, seed);
    else if (p.name == "lie_unigraph")
        spec = lie_unigraph_spec(p.d_in, p.hidden, p.layers, p.t_max, p.d_out, seed);
    else if (p.name == "gcn")
        spec = gcn_spec(p.d_in, p.hidden, p.layers, p.d_out, seed);
    else if (p.name == "r_unimesh")
        spec = r_unimesh_spec(p.d_in, p.hidden, p.layers, p.t_max, p.decoder, p.decoder_hidden, p.d_out, seed);
    else
        fail(ErrorKind::config, "preset: unknown name '" + p.name + "'");
    spec.residual = p.residual;
    try {
        spec.validate();
    } catch (const Error& e) {
        fail(ErrorKind::config, std::string("preset: ") + e.what());
    }
    return spec;
}

ModelSpec TrainRunConfig::resolved_model() const
{
    const std::uint64_t model_seed = derive_seed(seed, "model");
    if (model) {
        ModelSpec spec = *model;
        spec.seed = model_seed;
        return spec;
    }
    return model_from_preset(preset.value_or(ModelPreset{}), model_seed);
}

namespace {

ModelPreset preset_from_json(const json& j, const std::string& where)
{
    check_keys(j, {"name", "d_in", "hidden", "layers", "t_max", "d_out", "decoder", "decoder_hidden", "residual"}, where);
    ModelPreset p;
    p.name = get_or(j, "name", p.name, where);
    p.d_in = get_or(j, "d_in", p.d_in, where);
    p.hidden = get_or(j, "hidden", p.hidden, where);
    p.layers = get_or(j, "layers", p.layers, where);
    p.t_max = get_or(j, "t_max", p.t_max, where);
    p.d_out = get_or(j, "d_out", p.d_out, where);
    p.decoder = get_or(j, "decoder", p.decoder, where);
    p.decoder_hidden = get_or(j, "decoder_hidden", p.decoder_hidden, where);
    p.residual = get_or(j, "residual", p.residual, where);
    return p;
}

json preset_to_json(const ModelPreset& p)
{
    return json{{"name", p.name}, {"d_in", p.d_in}, {"hidden", p.hidden}, {"layers", p.layers}, {"t_max", p.t_max},
        {"d_out", p.d_out}, {"decoder", p.decoder}, {"decoder_hidden", p.decoder_hidden}, {"residual", p.residual}};
}

} // namespace

TrainRunConfig train_run_config_from_json(const json& j)
{
    const std::string where = "train config";
    check_keys(j, {"seed", "preset", "model", "train", "lr_sweep"}, where);
    TrainRunConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    require(!(j.contains("preset") && j.contains("model")), ErrorKind::config,
        where + ": give either 'preset' or 'model', not both");
    if (j.contains("model")) c.model = model_spec_from_json(j.at("model").dump());
    c.preset = preset_from_json(j.value("preset", json::object()), where + ".preset");
    if (c.model) c.preset.reset();
    c.train = train_config_from_json(j.value("train", json::object()), where + ".train");
    c.train.seed = derive_seed(c.seed, "train");
    c.lr_sweep = get_or(j, "lr_sweep", c.lr_sweep, where);
    for (double lr : c.lr_sweep)
        require(lr >= 0.0 && std::isfinite(lr), ErrorKind::config, where + ": lr_sweep values must be finite and >= 0");
    (void)c.resolved_model();
    return c;
}

json train_run_config_to_json(const TrainRunConfig& c)
{
    json j{{"seed", c.seed}};
    if (c.model)
        j["model"] = json::parse(model_spec_to_json(*c.model));
    else
        j["preset"] = preset_to_json(c.preset.value_or(ModelPreset{}));
    j["train"] = train_config_to_json(c.train);
    j["lr_sweep"] = c.lr_sweep;
    return j;
}

SensitivityRunConfig sensitivity_config_from_json(const json& j)
{
    const std::string where = "sensitivity config";
    check_keys(j, {"seed", "data", "layer", "width", "scalar_kind", "t_max_values", "seeds"}, where);
    SensitivityRunConfig c;
    SensitivityConfig& s = c.sweep;
    s.seed = get_or(j, "seed", s.seed, where);
    const json data = j.value("data", json::object());
    require(!data.contains("seed"), ErrorKind::config, where + ".data: the seed comes from the top-level 'seed'");
    s.data = heat_grid_from_json(data, where + ".data");
    s.data.seed = derive_seed(s.seed, "heat_grid");
    s.layer = layer_kind_from_string(get_or<std::string>(j, "layer", "lie_uni", where));
    s.width = get_or(j, "width", s.width, where);
    s.scalar_kind = scalar_kind_from_string(get_or<std::string>(j, "scalar_kind", "real64", where));
    s.t_max_values = get_or(j, "t_max_values", s.t_max_values, where);
    s.seeds = get_or(j, "seeds", s.seeds, where);
    try {
        s.validate();
        (void)sensitivity_model_spec(s, s.t_max_values.front(), 0);
    } catch (const Error& e) {
        fail(ErrorKind::config, where + ": " + e.what());
    }
    return c;
}

json sensitivity_config_to_json(const SensitivityRunConfig& c)
{
    const SensitivityConfig& s = c.sweep;
    json data = heat_grid_to_json(s.data);
    data.erase("seed");
    return json{{"seed", s.seed}, {"data", data}, {"layer", to_string(s.layer)}, {"width", s.width},
        {"scalar_kind", to_string(s.scalar_kind)}, {"t_max_values", s.t_max_values}, {"seeds", s.seeds}};
}

OrbitSampler BoundRunConfig::sampler() const
{
    OrbitSampler s;
    s.dimension = dimension;
    s.radius_density = make_radius_density(density, dimension, r_min, r_max);
    s.r_min = r_min;
    s.r_max = r_max;
    s.target = make_target(target, dimension, derive_seed(seed, "target"));
    s.seed = derive_seed(seed, "sampler");
    s.validate();
    return s;
}

BoundRunConfig bound_config_from_json(const json& j)
{
    const std::string where = "bound config";
    check_keys(j,
        {"seed", "target", "dimension", "density", "r_min", "r_max", "samples", "radii", "mode", "unitary",
            "fit_batch", "fit_steps", "fit_lr", "eval_samples"},
        where);
    BoundRunConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    c.target = get_or(j, "target", c.target, where);
    c.dimension = get_or(j, "dimension", c.dimension, where);
    c.density = get_or(j, "density", c.density, where);
    c.r_min = get_or(j, "r_min", c.r_min, where);
    c.r_max = get_or(j, "r_max", c.r_max, where);
    c.samples = get_or(j, "samples", c.samples, where);
    c.radii = get_or(j, "radii", c.radii, where);
    c.mode = variance_mode_from_string(get_or<std::string>(j, "mode", "norm", where));
    c.unitary = get_or(j, "unitary", c.unitary, where);
    c.fit_batch = get_or(j, "fit_batch", c.fit_batch, where);
    c.fit_steps = get_or(j, "fit_steps", c.fit_steps, where);
    c.fit_lr = get_or(j, "fit_lr", c.fit_lr, where);
    c.eval_samples = get_or(j, "eval_samples", c.eval_samples, where);
    require(c.unitary == "fit_rotation" || c.unitary == "norm_matched" || c.unitary == "none", ErrorKind::config,
        where + ": unitary must be 'fit_rotation', 'norm_matched' or 'none'");
    require(c.samples >= 1000 && c.eval_samples >= 1000, ErrorKind::config,
        where + ": samples and eval_samples must be >= 1000");
    require(c.radii >= 2, ErrorKind::config, where + ": radii must be >= 2");
    require(c.fit_batch >= 1 && c.fit_steps >= 1 && c.fit_lr > 0.0, ErrorKind::config, where + ": bad fit settings");
    try {
        (void)c.sampler();
    } catch (const Error& e) {
        fail(ErrorKind::config, where + ": " + e.what());
    }
    return c;
}

json bound_config_to_json(const BoundRunConfig& c)
{
    return json{{"seed", c.seed}, {"target", c.target}, {"dimension", c.dimension}, {"density", c.density},
        {"r_min", c.r_min}, {"r_max", c.r_max}, {"samples", c.samples}, {"radii", c.radii},
        {"mode", to_string(c.mode)}, {"unitary", c.unitary}, {"fit_batch", c.fit_batch}, {"fit_steps", c.fit_steps},
        {"fit_lr", c.fit_lr}, {"eval_samples", c.eval_samples}};
}

} // namespace smoothdyn::cli
