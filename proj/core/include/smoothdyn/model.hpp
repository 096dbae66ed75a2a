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

#include <smoothdyn/layers.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace smoothdyn {

enum class LayerKind {
    gcn,
    sep_uni,
    lie_uni,
    taylor_relaxed,
    zero_pad,
    group_sort,
    mlp_sin,
    gcn_decoder,
    linear,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct LayerSpec
{
    LayerKind kind = LayerKind::linear;
    int width_in = 1;
    int width_out = 1;
    /// Exponential layers only.
    int t_max = 0;
    /// gcn only.
    Activation activation = Activation::relu;
    /// mlp_sin only: width of the sin hidden layer.
    int hidden = 0;

    bool is_unitary_family() const
    {
        return kind == LayerKind::sep_uni || kind == LayerKind::lie_uni || kind == LayerKind::taylor_relaxed;
    }
    bool is_decoder() const
    {
        return kind == LayerKind::mlp_sin || kind == LayerKind::gcn_decoder || kind == LayerKind::linear;
    }
};

enum class OperatorSource { graph_normalized, mesh_weighted };

std::string_view to_string(OperatorSource source);
OperatorSource operator_source_from_string(std::string_view name);
std::string_view to_string(ScalarKind kind);
ScalarKind scalar_kind_from_string(std::string_view name);

struct ModelSpec
{
    std::string name = "model";
    std::vector<LayerSpec> layers;
    OperatorSource operator_source = OperatorSource::graph_normalized;
    ScalarKind scalar_kind = ScalarKind::real64;
    std::uint64_t seed = 0;
    /// Predict an increment: output = last input frame + network(X).
    bool residual = false;
    /// Width of one frame; input width must be a multiple of it.
    int frame_width = 1;

    int input_width() const { return layers.empty() ? frame_width : layers.front().width_in; }
    int output_width() const { return layers.empty() ? frame_width : layers.back().width_out; }

    /// Throws config errors for width mismatches, bad t_max and scalar-kind
    /// restrictions.
    void validate() const;
};

std::string model_spec_to_json(const ModelSpec& spec);
/// Strict: unknown keys are config errors.
ModelSpec model_spec_from_json(const std::string& text);

/// zero_pad(d_in -> hidden), `layers` taylor_relaxed(t_max), linear(hidden -> d_out).
ModelSpec r_unigraph_spec(int d_in, int hidden, int layers, int t_max, int d_out, std::uint64_t seed);
/// Same stack with lie_uni layers.
ModelSpec lie_unigraph_spec(int d_in, int hidden, int layers, int t_max, int d_out, std::uint64_t seed);
/// gcn(d_in -> hidden, relu), (layers - 2) x gcn(hidden -> hidden, relu), gcn_decoder(hidden -> d_out).
ModelSpec gcn_spec(int d_in, int hidden, int layers, int d_out, std::uint64_t seed);
/// zero_pad -> layers x (lie_uni + group_sort) -> decoder ("mlp_sin" or "gcn_decoder").
ModelSpec r_unimesh_spec(
    int d_in,
    int hidden,
    int layers,
    int t_max,
    const std::string& decoder,
    int decoder_hidden,
    int d_out,
    std::uint64_t seed);

template <typename T>
class Model
{
public:
    explicit Model(ModelSpec spec);

    const ModelSpec& spec() const { return m_spec; }
    std::vector<Param<T>>& params() { return m_params; }
    const std::vector<Param<T>>& params() const { return m_params; }
    std::vector<Param<T>*> param_ptrs();

    /// Real degrees of freedom: complex entries count twice unless the
    /// parameter is constrained to the reals.
    std::size_t parameter_count() const;

    NodeId forward(Tape<T>& tape, NodeId x, const OperatorPtr& op);
    /// Layers before the first decoder layer.
    NodeId encode(Tape<T>& tape, NodeId x, const OperatorPtr& op);

    /// Forward without keeping the tape; returns the real part.
    RealMatrix predict(const RealMatrix& x, const OperatorPtr& op);

private:
    NodeId run(Tape<T>& tape, NodeId x, const OperatorPtr& op, std::size_t end);

    ModelSpec m_spec;
    std::vector<Param<T>> m_params;
    std::vector<std::vector<std::size_t>> m_layer_params;
};

template <typename T>
Matrix<T> to_scalar(const RealMatrix& m);

/// Writes spec.json and one matrix file per parameter into `dir` (created if
/// missing). Complex parameters store the real and imaginary parts as two frames.
template <typename T>
void save_checkpoint(const std::string& dir, const Model<T>& model);

ModelSpec read_checkpoint_spec(const std::string& dir);

template <typename T>
Model<T> load_checkpoint(const std::string& dir);

} // namespace smoothdyn
