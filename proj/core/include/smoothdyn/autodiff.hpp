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

#include <smoothdyn/linalg.hpp>

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace smoothdyn {

/// Learnable tensor. Gradients follow the convention grad = dL/dRe + i dL/dIm,
/// so for real tapes this is the ordinary gradient and for complex tapes a
/// gradient step is always `value -= lr * grad`.
template <typename T>
struct Param
{
    Param() = default;
    Param(std::string name_, Matrix<T> value_, bool real_valued_ = false)
        : name(std::move(name_))
        , value(std::move(value_))
        , grad(Matrix<T>::Zero(value.rows(), value.cols()))
        , real_valued(real_valued_)
    {}

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
    Eigen::Index size() const { return value.size(); }

    std::string name;
    Matrix<T> value;
    Matrix<T> grad;
    /// Constrains a parameter on a complex tape to the reals (the imaginary part
    /// of its gradient is discarded).
    bool real_valued = false;
};

using NodeId = std::size_t;

enum class OpKind {
    constant,
    param,
    matmul,
    sparse_matmul,
    add,
    subtract,
    scalar_multiply,
    hadamard,
    transpose_conj,
    zero_pad,
    group_sort,
    sin,
    relu,
    truncated_exp_operator,
    matrix_exp,
    slice_columns,
    mse,
};

std::string_view to_string(OpKind kind);

/// Append-only record of dense-matrix operations for reverse-mode AD.
///
/// Forward values (and every intermediate the backward pass needs, e.g. the
/// Horner stages of the truncated exponential) are cached at record time.
/// Shapes are never broadcast. A tape is single-threaded; distinct tapes are
/// independent.
template <typename T>
class Tape
{
public:
    using Mat = Matrix<T>;

    NodeId constant(Mat value);
    NodeId param(Param<T>& p);

    NodeId matmul(NodeId a, NodeId b);
    /// Left product with a constant real sparse operator.
    NodeId matmul(std::shared_ptr<const SparseOperator> op, NodeId x);
    NodeId add(NodeId a, NodeId b);
    NodeId subtract(NodeId a, NodeId b);
    /// s * x where s is a 1x1 node.
    NodeId scalar_multiply(NodeId s, NodeId x);
    /// c * x with a constant scalar.
    NodeId scalar_multiply(T c, NodeId x);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId transpose_conj(NodeId a);
    NodeId zero_pad(NodeId a, Eigen::Index cols_out);
    /// Sorts consecutive column pairs of each row ascending (MaxMin); an odd
    /// trailing column passes through. Real tapes only.
    NodeId group_sort(NodeId a);
    NodeId sin(NodeId a);
    /// Real tapes only.
    NodeId relu(NodeId a);
    /// sum_{i=0}^{t_max} L^i(X) / i! with L(X) = A X W, in Horner form.
    NodeId truncated_exp_operator(
        std::shared_ptr<const SparseOperator> op,
        NodeId x,
        NodeId w,
        int t_max);
    /// Reference matrix exponential of a square node.
    NodeId matrix_exp(NodeId w);
    NodeId slice_columns(NodeId a, Eigen::Index begin, Eigen::Index count);
    /// Mean of |pred - target|^2 over all entries, as a 1x1 node.
    NodeId mse(NodeId pred, NodeId target);

    const Mat& value(NodeId id) const;
    OpKind kind(NodeId id) const;
    std::size_t size() const { return m_nodes.size(); }

    /// Accumulates d(loss)/d(param) into every Param recorded on this tape.
    /// The loss node must be 1x1.
    void backward(NodeId loss);

private:
    struct Node
    {
        OpKind kind = OpKind::constant;
        std::vector<NodeId> inputs;
        Mat value;
        Param<T>* param = nullptr;
        std::shared_ptr<const SparseOperator> op;
        T scalar{};
        Eigen::Index a = 0;
        Eigen::Index b = 0;
        int t_max = 0;
        std::vector<Mat> stages;    // Horner iterates p_0..p_T
        std::vector<Mat> products;  // A p_{k+1} for k = 0..T-1
        std::vector<int> swapped;   // group_sort: 1 where a pair was swapped
    };

    NodeId push(Node node);
    const Node& node(NodeId id) const;

    std::vector<Node> m_nodes;
};

template <typename T>
void zero_grad(const std::vector<Param<T>*>& params)
{
    for (Param<T>* p : params) p->zero_grad();
}

struct GradCheckReport
{
    double max_relative_error = 0.0;
    std::string worst_param;
    Eigen::Index worst_row = 0;
    Eigen::Index worst_col = 0;
    bool worst_imag = false;
};

/// Central finite-difference check of tape gradients. `forward` must record
/// the model on the given tape and return a 1x1 loss node; it is called
/// 1 + 2 * (number of perturbed real degrees of freedom) times.
template <typename T>
GradCheckReport grad_check(
    const std::function<NodeId(Tape<T>&)>& forward,
    const std::vector<Param<T>*>& params,
    double epsilon = 1e-5);

} // namespace smoothdyn
