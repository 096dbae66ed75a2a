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

#include <smoothdyn/autodiff.hpp>
#include <smoothdyn/mesh.hpp>

#include <memory>

namespace smoothdyn {

using OperatorPtr = std::shared_ptr<const SparseOperator>;

enum class Activation { identity, relu, sin };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

template <typename T>
NodeId apply_activation(Tape<T>& tape, NodeId x, Activation a);

/// A X W followed by the activation.
template <typename T>
NodeId gcn_layer(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& w, Activation act = Activation::relu);

/// exp(i t A) X U with U = exp(S - S^dagger); the operator exponential is the
/// Taylor polynomial of degree t_max. `t` must be a real-valued 1x1 parameter.
NodeId sep_uni_conv(
    Tape<Complex>& tape,
    NodeId x,
    const OperatorPtr& a_norm,
    Param<Complex>& t,
    Param<Complex>& s,
    int t_max = 10);

/// sum_{i <= t_max} L^i(X) / i! with L(X) = A X (S - S^dagger).
template <typename T>
NodeId lie_uni_conv(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& s, int t_max);

/// Same polynomial; the name used for small t_max.
template <typename T>
NodeId taylor_relaxed_conv(Tape<T>& tape, NodeId x, const OperatorPtr& a_norm, Param<T>& s, int t_max);

template <typename T>
NodeId zero_pad_layer(Tape<T>& tape, NodeId x, Eigen::Index d_out);

enum class MeshConvVariant { sep, lie };

/// Mesh convolution on D^{-1/2}(W o A)D^{-1/2}. Rejects operators with negative
/// cotangent weights. For `sep` on a real tape, exp(i t A) is unavailable and a
/// config error is raised.
template <typename T>
NodeId uni_mesh_conv(
    Tape<T>& tape,
    NodeId x,
    const MeshOperators& ops,
    MeshConvVariant variant,
    Param<T>& s,
    Param<T>* t,
    int t_max);

/// X W + 1 b^T (per-node affine map).
template <typename T>
NodeId affine(Tape<T>& tape, NodeId x, Param<T>& w, Param<T>& b);

} // namespace smoothdyn
