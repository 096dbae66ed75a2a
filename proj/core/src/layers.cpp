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

#include <smoothdyn/layers.hpp>

namespace smoothdyn {

std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sin: return "sin";
    }
    return "unknown";
}

Activation activation_from_string(std::string_view name)
{
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "sin") return Activation::sin;
    fail(ErrorKind::config, "unknown activation '" + std::string(name) + "'");
}

template <typename T>
NodeId apply_activation(Tape<T>& tape, NodeId x, Activation a)
{
    switch (a) {
    case Activation::identity: return x;
    case Activation::relu:
        if constexpr (is_complex_v<T>) {
            fail(ErrorKind::config, "relu activation requires a real model");
        } else {
            return tape.relu(x);
        }
    case Activation::sin: return tape.sin(x);
    }
    return x;
}

template <typename T>
NodeId gcn_layer(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& w, Activation act)
{
    const NodeId ax = tape.matmul(a_norm, x);
    const NodeId y = tape.matmul(ax, tape.param(w));
    return apply_activation(tape, y, act);
}

NodeId sep_uni_conv(
    Tape<Complex>& tape,
    NodeId x,
    const OperatorPtr& a_norm,
    Param<Complex>& t,
    Param<Complex>& s,
    int t_max)
{
    require(t_max >= 1, ErrorKind::config, "sep_uni_conv: t_max must be >= 1");
    require(t.real_valued && t.value.size() == 1, ErrorKind::config, "sep_uni_conv: t must be a real-valued 1x1 parameter");
    const Eigen::Index d = tape.value(x).cols();
    require(
        s.value.rows() == d && s.value.cols() == d,
        ErrorKind::dimension,
        "sep_uni_conv: S must be " + std::to_string(d) + "x" + std::to_string(d));
    const NodeId i_eye = tape.constant(ComplexMatrix::Identity(d, d) * Complex(0.0, 1.0));
    const NodeId w = tape.scalar_multiply(tape.param(t), i_eye);
    const NodeId diffused = tape.truncated_exp_operator(a_norm, x, w, t_max);
    const NodeId sn = tape.param(s);
    const NodeId u = tape.matrix_exp(tape.subtract(sn, tape.transpose_conj(sn)));
    return tape.matmul(diffused, u);
}

template <typename T>
NodeId lie_uni_conv(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& s, int t_max)
{
    require(t_max >= 1, ErrorKind::config, "lie_uni_conv: t_max must be >= 1");
    const NodeId sn = tape.param(s);
    const NodeId w = tape.subtract(sn, tape.transpose_conj(sn));
    return tape.truncated_exp_operator(a_norm, x, w, t_max);
}

template <typename T>
NodeId taylor_relaxed_conv(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& s, int t_max)
{
    return lie_uni_conv(tape, x, a_norm, s, t_max);
}

template <typename T>
NodeId zero_pad_layer(Tape<T>& tape, NodeId x, Eigen::Index d_out)
{
    return tape.zero_pad(x, d_out);
}

template <typename T>
NodeId uni_mesh_conv(
    Tape<T>& tape,
    NodeId x,
    const MeshOperators& ops,
    MeshConvVariant variant,
    Param<T>& s,
    Param<T>* t,
    int t_max)
{
    require_nonnegative_weights(ops);
    if (variant == MeshConvVariant::lie) return lie_uni_conv(tape, x, ops.adjacency, s, t_max);
    if constexpr (is_complex_v<T>) {
        require(t != nullptr, ErrorKind::config, "uni_mesh_conv: sep variant needs a t parameter");
        return sep_uni_conv(tape, x, ops.adjacency, *t, s, t_max);
    } else {
        fail(ErrorKind::config, "uni_mesh_conv: the separable variant requires complex scalars");
    }
}

template <typename T>
NodeId affine(Tape<T>& tape, NodeId x, Param<T>& w, Param<T>& b)
{
    const Eigen::Index n = tape.value(x).rows();
    const NodeId xw = tape.matmul(x, tape.param(w));
    const NodeId ones = tape.constant(Matrix<T>::Ones(n, 1));
    return tape.add(xw, tape.matmul(ones, tape.param(b)));
}

#define SMOOTHDYN_INSTANTIATE(T)                                                                                       \
    template NodeId apply_activation(Tape<T>&, NodeId, Activation);                                                    \
    template NodeId gcn_layer(Tape<T>&, NodeId, const OperatorPtr&, Param<T>&, Activation);                           \
    template NodeId lie_uni_conv(Tape<T>&, NodeId, const OperatorPtr&, Param<T>&, int);                               \
    template NodeId taylor_relaxed_conv(Tape<T>&, NodeId, const OperatorPtr&, Param<T>&, int);                        \
    template NodeId zero_pad_layer(Tape<T>&, NodeId, Eigen::Index);                                                    \
    template NodeId uni_mesh_conv(Tape<T>&, NodeId, const MeshOperators&, MeshConvVariant, Param<T>&, Param<T>*, int); \
    template NodeId affine(Tape<T>&, NodeId, Param<T>&, Param<T>&);

SMOOTHDYN_INSTANTIATE(double)
SMOOTHDYN_INSTANTIATE(Complex)

#undef SMOOTHDYN_INSTANTIATE

} // namespace smoothdyn
