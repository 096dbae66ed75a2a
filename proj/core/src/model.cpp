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

#include <smoothdyn/model.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/trajectory_io.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace smoothdyn {

using nlohmann::json;

std::string_view to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::gcn: return "gcn";
    case LayerKind::sep_uni: return "sep_uni";
    case LayerKind::lie_uni: return "lie_uni";
    case LayerKind::taylor_relaxed: return "taylor_relaxed";
    case LayerKind::zero_pad: return "zero_pad";
    case LayerKind::group_sort: return "group_sort";
    case LayerKind::mlp_sin: return "mlp_sin";
    case LayerKind::gcn_decoder: return "gcn_decoder";
    case LayerKind::linear: return "linear";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name)
{
    for (LayerKind k : {LayerKind::gcn, LayerKind::sep_uni, LayerKind::lie_uni, LayerKind::taylor_relaxed,
             LayerKind::zero_pad, LayerKind::group_sort, LayerKind::mlp_sin, LayerKind::gcn_decoder,
             LayerKind::linear}) {
        if (to_string(k) == name) return k;
    }
    fail(ErrorKind::config, "unknown layer kind '" + std::string(name) + "'");
}

std::string_view to_string(OperatorSource source)
{
    return source == OperatorSource::graph_normalized ? "graph_normalized" : "mesh_weighted";
}

OperatorSource operator_source_from_string(std::string_view name)
{
    if (name == "graph_normalized") return OperatorSource::graph_normalized;
    if (name == "mesh_weighted") return OperatorSource::mesh_weighted;
    fail(ErrorKind::config, "unknown operator source '" + std::string(name) + "'");
}

std::string_view to_string(ScalarKind kind)
{
    return kind == ScalarKind::real64 ? "real64" : "complex128";
}

ScalarKind scalar_kind_from_string(std::string_view name)
{
    if (name == "real64") return ScalarKind::real64;
    if (name == "complex128") return ScalarKind::complex128;
    fail(ErrorKind::config, "unknown scalar kind '" + std::string(name) + "'");
}

void ModelSpec::validate() const
{
    require(frame_width >= 1, ErrorKind::config, "model: frame_width must be >= 1");
    const bool complex = scalar_kind == ScalarKind::complex128;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        const std::string where = "model: layer " + std::to_string(i) + " (" + std::string(to_string(l.kind)) + ")";
        require(l.width_in >= 1 && l.width_out >= 1, ErrorKind::config, where + ": widths must be >= 1");
        if (i > 0) {
            require(
                l.width_in == layers[i - 1].width_out,
                ErrorKind::config,
                where + ": width_in " + std::to_string(l.width_in) + " does not match previous width_out " +
                    std::to_string(layers[i - 1].width_out));
        }
        if (l.is_unitary_family()) {
            require(l.width_in == l.width_out, ErrorKind::config, where + ": unitary layers cannot change the channel dimension");
            require(l.t_max >= 1, ErrorKind::config, where + ": t_max must be >= 1");
        }
        if (l.kind == LayerKind::sep_uni) {
            require(complex, ErrorKind::config, where + ": the separable layer requires complex128 scalars");
        }
        if (l.kind == LayerKind::zero_pad) {
            require(l.width_out >= l.width_in, ErrorKind::config, where + ": zero_pad cannot shrink the width");
        }
        if (l.kind == LayerKind::group_sort) {
            require(l.width_in == l.width_out, ErrorKind::config, where + ": group_sort keeps the width");
            require(!complex, ErrorKind::config, where + ": group_sort requires real64 scalars");
        }
        if (l.kind == LayerKind::gcn && l.activation == Activation::relu) {
            require(!complex, ErrorKind::config, where + ": relu requires real64 scalars");
        }
        if (l.kind == LayerKind::mlp_sin) {
            require(l.hidden >= 1, ErrorKind::config, where + ": hidden must be >= 1");
        }
    }
    require(
        input_width() % frame_width == 0,
        ErrorKind::config,
        "model: input width " + std::to_string(input_width()) + " is not a multiple of frame_width " +
            std::to_string(frame_width));
    if (residual) {
        require(
            output_width() == frame_width,
            ErrorKind::config,
            "model: residual output needs output width == frame_width");
    }
}

namespace {

json layer_to_json(const LayerSpec& l)
{
    json j{{"kind", to_string(l.kind)}, {"width_in", l.width_in}, {"width_out", l.width_out}};
    if (l.is_unitary_family()) j["t_max"] = l.t_max;
    if (l.kind == LayerKind::gcn) j["activation"] = to_string(l.activation);
    if (l.kind == LayerKind::mlp_sin) j["hidden"] = l.hidden;
    return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    require(j.is_object(), ErrorKind::config, where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        require(allowed.count(key) != 0, ErrorKind::config, where + ": unknown key '" + key + "'");
    }
}

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

LayerSpec layer_from_json(const json& j, const std::string& where)
{
    check_keys(j, {"kind", "width_in", "width_out", "t_max", "activation", "hidden"}, where);
    require(j.contains("kind"), ErrorKind::config, where + ": missing 'kind'");
    LayerSpec l;
    l.kind = layer_kind_from_string(get_or<std::string>(j, "kind", "", where));
    l.width_in = get_or<int>(j, "width_in", 1, where);
    l.width_out = get_or<int>(j, "width_out", l.width_in, where);
    l.t_max = get_or<int>(j, "t_max", 0, where);
    l.activation = activation_from_string(get_or<std::string>(j, "activation", "relu", where));
    l.hidden = get_or<int>(j, "hidden", 0, where);
    return l;
}

json spec_to_json_value(const ModelSpec& spec)
{
    json layers = json::array();
    for (const LayerSpec& l : spec.layers) layers.push_back(layer_to_json(l));
    return json{
        {"name", spec.name},
        {"layers", layers},
        {"operator_source", to_string(spec.operator_source)},
        {"scalar_kind", to_string(spec.scalar_kind)},
        {"seed", spec.seed},
        {"residual", spec.residual},
        {"frame_width", spec.frame_width},
    };
}

ModelSpec spec_from_json_value(const json& j)
{
    const std::string where = "model spec";
    check_keys(j, {"name", "layers", "operator_source", "scalar_kind", "seed", "residual", "frame_width"}, where);
    ModelSpec spec;
    spec.name = get_or<std::string>(j, "name", "model", where);
    spec.operator_source = operator_source_from_string(get_or<std::string>(j, "operator_source", "graph_normalized", where));
    spec.scalar_kind = scalar_kind_from_string(get_or<std::string>(j, "scalar_kind", "real64", where));
    spec.seed = get_or<std::uint64_t>(j, "seed", 0, where);
    spec.residual = get_or<bool>(j, "residual", false, where);
    spec.frame_width = get_or<int>(j, "frame_width", 1, where);
    if (j.contains("layers")) {
        require(j["layers"].is_array(), ErrorKind::config, where + ": 'layers' must be an array");
        for (std::size_t i = 0; i < j["layers"].size(); ++i) {
            spec.layers.push_back(layer_from_json(j["layers"][i], where + ".layers[" + std::to_string(i) + "]"));
        }
    }
    spec.validate();
    return spec;
}

} // namespace

std::string model_spec_to_json(const ModelSpec& spec)
{
    return spec_to_json_value(spec).dump(2);
}

ModelSpec model_spec_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("model spec: ") + e.what());
    }
    return spec_from_json_value(j);
}

namespace {

ModelSpec unitary_graph_stack(LayerKind kind, int d_in, int hidden, int layers, int t_max, int d_out, std::uint64_t seed)
{
    ModelSpec spec;
    spec.seed = seed;
    spec.frame_width = d_out;
    spec.layers.push_back({LayerKind::zero_pad, d_in, hidden});
    for (int k = 0; k < layers; ++k) {
        LayerSpec l{kind, hidden, hidden};
        l.t_max = t_max;
        spec.layers.push_back(l);
    }
    spec.layers.push_back({LayerKind::linear, hidden, d_out});
    return spec;
}

} // namespace

ModelSpec r_unigraph_spec(int d_in, int hidden, int layers, int t_max, int d_out, std::uint64_t seed)
{
    ModelSpec spec = unitary_graph_stack(LayerKind::taylor_relaxed, d_in, hidden, layers, t_max, d_out, seed);
    spec.name = "r_unigraph";
    return spec;
}

ModelSpec lie_unigraph_spec(int d_in, int hidden, int layers, int t_max, int d_out, std::uint64_t seed)
{
    ModelSpec spec = unitary_graph_stack(LayerKind::lie_uni, d_in, hidden, layers, t_max, d_out, seed);
    spec.name = "lie_unigraph";
    return spec;
}

ModelSpec gcn_spec(int d_in, int hidden, int layers, int d_out, std::uint64_t seed)
{
    require(layers >= 1, ErrorKind::config, "gcn_spec: need at least one layer");
    ModelSpec spec;
    spec.name = "gcn";
    spec.seed = seed;
    spec.frame_width = d_out;
    int width = d_in;
    for (int k = 0; k + 1 < layers; ++k) {
        spec.layers.push_back({LayerKind::gcn, width, hidden, 0, Activation::relu});
        width = hidden;
    }
    spec.layers.push_back({LayerKind::gcn_decoder, width, d_out});
    return spec;
}

ModelSpec r_unimesh_spec(
    int d_in,
    int hidden,
    int layers,
    int t_max,
    const std::string& decoder,
    int decoder_hidden,
    int d_out,
    std::uint64_t seed)
{
    ModelSpec spec;
    spec.name = "r_unimesh";
    spec.seed = seed;
    spec.frame_width = d_out;
    spec.operator_source = OperatorSource::mesh_weighted;
    spec.layers.push_back({LayerKind::zero_pad, d_in, hidden});
    for (int k = 0; k < layers; ++k) {
        LayerSpec l{LayerKind::lie_uni, hidden, hidden};
        l.t_max = t_max;
        spec.layers.push_back(l);
        spec.layers.push_back({LayerKind::group_sort, hidden, hidden});
    }
    if (decoder == "mlp_sin") {
        LayerSpec l{LayerKind::mlp_sin, hidden, d_out};
        l.hidden = decoder_hidden;
        spec.layers.push_back(l);
    } else if (decoder == "gcn_decoder") {
        spec.layers.push_back({LayerKind::gcn_decoder, hidden, d_out});
    } else {
        fail(ErrorKind::config, "r_unimesh_spec: unknown decoder '" + decoder + "'");
    }
    return spec;
}

namespace {

template <typename T>
Matrix<T> random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev)
{
    Matrix<T> m(rows, cols);
    if constexpr (is_complex_v<T>) {
        std::normal_distribution<double> normal(0.0, stddev / std::sqrt(2.0));
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) {
                const double re = normal(rng);
                const double im = normal(rng);
                m(r, c) = Complex(re, im);
            }
    } else {
        std::normal_distribution<double> normal(0.0, stddev);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    }
    return m;
}

} // namespace

template <typename T>
Model<T>::Model(ModelSpec spec)
    : m_spec(std::move(spec))
{
    m_spec.validate();
    require(
        m_spec.scalar_kind == scalar_kind_of<T>(),
        ErrorKind::config,
        "model: spec scalar kind " + std::string(to_string(m_spec.scalar_kind)) + " does not match the model type");
    Rng rng(derive_seed(m_spec.seed, "params"));
    auto add = [&](std::size_t layer, std::string name, Matrix<T> value, bool real_valued = false) {
        m_params.emplace_back("layer" + std::to_string(layer) + "." + name, std::move(value), real_valued);
        m_layer_params[layer].push_back(m_params.size() - 1);
    };
    m_layer_params.resize(m_spec.layers.size());
    for (std::size_t i = 0; i < m_spec.layers.size(); ++i) {
        const LayerSpec& l = m_spec.layers[i];
        const double s_in = 1.0 / std::sqrt(static_cast<double>(l.width_in));
        // Generators: W = S - S^dagger then has off-diagonal entry variance 1/d.
        const double s_gen = 1.0 / std::sqrt(2.0 * static_cast<double>(l.width_in));
        switch (l.kind) {
        case LayerKind::gcn:
        case LayerKind::gcn_decoder: add(i, "W", random_matrix<T>(rng, l.width_in, l.width_out, s_in)); break;
        case LayerKind::sep_uni:
            add(i, "t", Matrix<T>::Constant(1, 1, T(1.0)), true);
            add(i, "S", random_matrix<T>(rng, l.width_in, l.width_in, s_gen));
            break;
        case LayerKind::lie_uni:
        case LayerKind::taylor_relaxed: add(i, "S", random_matrix<T>(rng, l.width_in, l.width_in, s_gen)); break;
        case LayerKind::zero_pad:
        case LayerKind::group_sort: break;
        case LayerKind::mlp_sin:
            add(i, "W1", random_matrix<T>(rng, l.width_in, l.hidden, s_in));
            add(i, "b1", Matrix<T>::Zero(1, l.hidden));
            add(i, "W2", random_matrix<T>(rng, l.hidden, l.width_out, 1.0 / std::sqrt(static_cast<double>(l.hidden))));
            add(i, "b2", Matrix<T>::Zero(1, l.width_out));
            break;
        case LayerKind::linear:
            add(i, "W", random_matrix<T>(rng, l.width_in, l.width_out, s_in));
            add(i, "b", Matrix<T>::Zero(1, l.width_out));
            break;
        }
    }
}

template <typename T>
std::vector<Param<T>*> Model<T>::param_ptrs()
{
    std::vector<Param<T>*> out;
    out.reserve(m_params.size());
    for (auto& p : m_params) out.push_back(&p);
    return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const
{
    std::size_t count = 0;
    for (const auto& p : m_params) {
        const auto n = static_cast<std::size_t>(p.value.size());
        count += (is_complex_v<T> && !p.real_valued) ? 2 * n : n;
    }
    return count;
}

template <typename T>
NodeId Model<T>::run(Tape<T>& tape, NodeId x, const OperatorPtr& op, std::size_t end)
{
    const Eigen::Index width = tape.value(x).cols();
    require(
        width == m_spec.input_width(),
        ErrorKind::dimension,
        "model: input has " + std::to_string(width) + " columns, spec expects " + std::to_string(m_spec.input_width()));
    NodeId h = x;
    for (std::size_t i = 0; i < end; ++i) {
        const LayerSpec& l = m_spec.layers[i];
        const auto& ids = m_layer_params[i];
        auto param = [&](std::size_t k) -> Param<T>& { return m_params[ids[k]]; };
        switch (l.kind) {
        case LayerKind::gcn: h = gcn_layer(tape, h, op, param(0), l.activation); break;
        case LayerKind::gcn_decoder: h = gcn_layer(tape, h, op, param(0), Activation::identity); break;
        case LayerKind::sep_uni:
            if constexpr (is_complex_v<T>) {
                h = sep_uni_conv(tape, h, op, param(0), param(1), l.t_max);
            } else {
                fail(ErrorKind::config, "sep_uni requires complex scalars");
            }
            break;
        case LayerKind::lie_uni: h = lie_uni_conv(tape, h, op, param(0), l.t_max); break;
        case LayerKind::taylor_relaxed: h = taylor_relaxed_conv(tape, h, op, param(0), l.t_max); break;
        case LayerKind::zero_pad: h = zero_pad_layer(tape, h, l.width_out); break;
        case LayerKind::group_sort: h = tape.group_sort(h); break;
        case LayerKind::mlp_sin: {
            const NodeId hidden = tape.sin(affine(tape, h, param(0), param(1)));
            h = affine(tape, hidden, param(2), param(3));
            break;
        }
        case LayerKind::linear: h = affine(tape, h, param(0), param(1)); break;
        }
    }
    if (m_spec.residual && end == m_spec.layers.size()) {
        const int fw = m_spec.frame_width;
        const NodeId last = tape.slice_columns(x, width - fw, fw);
        h = tape.add(last, h);
    }
    return h;
}

template <typename T>
NodeId Model<T>::forward(Tape<T>& tape, NodeId x, const OperatorPtr& op)
{
    return run(tape, x, op, m_spec.layers.size());
}

template <typename T>
NodeId Model<T>::encode(Tape<T>& tape, NodeId x, const OperatorPtr& op)
{
    std::size_t end = 0;
    while (end < m_spec.layers.size() && !m_spec.layers[end].is_decoder()) ++end;
    return run(tape, x, op, end);
}

template <typename T>
Matrix<T> to_scalar(const RealMatrix& m)
{
    if constexpr (is_complex_v<T>) {
        return m.cast<Complex>();
    } else {
        return m;
    }
}

template <typename T>
RealMatrix Model<T>::predict(const RealMatrix& x, const OperatorPtr& op)
{
    Tape<T> tape;
    const NodeId out = forward(tape, tape.constant(to_scalar<T>(x)), op);
    if constexpr (is_complex_v<T>) {
        return tape.value(out).real();
    } else {
        return tape.value(out);
    }
}

template class Model<double>;
template class Model<Complex>;
template Matrix<double> to_scalar<double>(const RealMatrix&);
template Matrix<Complex> to_scalar<Complex>(const RealMatrix&);

namespace fs = std::filesystem;

template <typename T>
void save_checkpoint(const std::string& dir, const Model<T>& model)
{
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "params", ec);
    require(!ec, ErrorKind::io, "checkpoint: cannot create '" + dir + "': " + ec.message());
    json params = json::array();
    for (std::size_t k = 0; k < model.params().size(); ++k) {
        const Param<T>& p = model.params()[k];
        std::ostringstream file;
        file << "params/" << std::setw(3) << std::setfill('0') << k << "_" << p.name << ".traj";
        Trajectory t;
        if constexpr (is_complex_v<T>) {
            t.times = {0.0, 1.0};
            t.frames = {p.value.real(), p.value.imag()};
        } else {
            t.times = {0.0};
            t.frames = {p.value};
        }
        save_trajectory((fs::path(dir) / file.str()).string(), t);
        params.push_back({{"name", p.name}, {"file", file.str()}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
    }
    const json j{{"model", spec_to_json_value(model.spec())}, {"params", params}};
    std::ofstream out(fs::path(dir) / "spec.json");
    require(static_cast<bool>(out), ErrorKind::io, "checkpoint: cannot write spec.json in '" + dir + "'");
    out << j.dump(2) << '\n';
}

namespace {

json read_checkpoint_json(const std::string& dir)
{
    std::ifstream in(fs::path(dir) / "spec.json");
    require(static_cast<bool>(in), ErrorKind::io, "checkpoint: cannot open '" + (fs::path(dir) / "spec.json").string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorKind::io, std::string("checkpoint spec.json: ") + e.what());
    }
    check_keys(j, {"model", "params"}, "checkpoint");
    require(j.contains("model") && j.contains("params") && j["params"].is_array(), ErrorKind::io, "checkpoint: spec.json needs 'model' and 'params'");
    return j;
}

} // namespace

ModelSpec read_checkpoint_spec(const std::string& dir)
{
    return spec_from_json_value(read_checkpoint_json(dir)["model"]);
}

template <typename T>
Model<T> load_checkpoint(const std::string& dir)
{
    const json j = read_checkpoint_json(dir);
    Model<T> model(spec_from_json_value(j["model"]));
    const json& params = j["params"];
    require(
        params.size() == model.params().size(),
        ErrorKind::io,
        "checkpoint: expected " + std::to_string(model.params().size()) + " parameters, found " +
            std::to_string(params.size()));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param<T>& p = model.params()[k];
        const std::string name = params[k].value("name", "");
        require(name == p.name, ErrorKind::io, "checkpoint: parameter " + std::to_string(k) + " is '" + name + "', expected '" + p.name + "'");
        const Trajectory t = load_trajectory((fs::path(dir) / params[k].value("file", "")).string());
        require(t.size() >= 1, ErrorKind::io, "checkpoint: empty parameter file for " + name);
        require(
            t.nodes() == p.value.rows() && t.channels() == p.value.cols(),
            ErrorKind::io,
            "checkpoint: shape mismatch for " + name);
        if constexpr (is_complex_v<T>) {
            require(t.size() == 2, ErrorKind::io, "checkpoint: complex parameter " + name + " needs two frames");
            p.value.real() = t.frames[0];
            p.value.imag() = t.frames[1];
        } else {
            require(t.size() == 1, ErrorKind::io, "checkpoint: real parameter " + name + " needs one frame");
            p.value = t.frames[0];
        }
        p.zero_grad();
    }
    return model;
}

template void save_checkpoint(const std::string&, const Model<double>&);
template void save_checkpoint(const std::string&, const Model<Complex>&);
template Model<double> load_checkpoint<double>(const std::string&);
template Model<Complex> load_checkpoint<Complex>(const std::string&);

} // namespace smoothdyn
