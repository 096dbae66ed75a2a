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

#include <smoothdyn/autodiff.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smoothdyn {

std::string_view to_string(OpKind kind)
{
    switch (kind) {
    case OpKind::constant: return "constant";
    case OpKind::param: return "param";
    case OpKind::matmul: return "matmul";
    case OpKind::sparse_matmul: return "sparse_matmul";
    case OpKind::add: return "add";
    case OpKind::subtract: return "subtract";
    case OpKind::scalar_multiply: return "scalar_multiply";
    case OpKind::hadamard: return "hadamard";
    case OpKind::transpose_conj: return "transpose_conj";
    case OpKind::zero_pad: return "zero_pad";
    case OpKind::group_sort: return "group_sort";
    case OpKind::sin: return "sin";
    case OpKind::relu: return "relu";
    case OpKind::truncated_exp_operator: return "truncated_exp_operator";
    case OpKind::matrix_exp: return "matrix_exp";
    case OpKind::slice_columns: return "slice_columns";
    case OpKind::mse: return "mse";
    }
    return "unknown";
}

namespace {

std::string shape(Eigen::Index r, Eigen::Index c)
{
    return std::to_string(r) + "x" + std::to_string(c);
}

template <typename M>
[[noreturn]] void shape_error(OpKind kind, std::size_t id, const M& a, const M& b)
{
    fail(
        ErrorKind::dimension,
        std::string(to_string(kind)) + " at node " + std::to_string(id) + ": incompatible shapes " +
            shape(a.rows(), a.cols()) + " and " + shape(b.rows(), b.cols()));
}

template <typename T>
T conj_of(T v)
{
    if constexpr (is_complex_v<T>) {
        return std::conj(v);
    } else {
        return v;
    }
}

/// Upper-right block of exp([[A, E], [0, A]]): the Frechet derivative of exp
/// at A in direction E.
template <typename T>
Matrix<T> frechet_exp(const Matrix<T>& a, const Matrix<T>& e)
{
    const Eigen::Index n = a.rows();
    Matrix<T> block = Matrix<T>::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a;
    block.topRightCorner(n, n) = e;
    block.bottomRightCorner(n, n) = a;
    return mat_exp_reference(block).topRightCorner(n, n);
}

} // namespace

template <typename T>
NodeId Tape<T>::push(Node node)
{
    m_nodes.push_back(std::move(node));
    return m_nodes.size() - 1;
}

template <typename T>
auto Tape<T>::node(NodeId id) const -> const Node&
{
    require(id < m_nodes.size(), ErrorKind::argument, "tape: unknown node id " + std::to_string(id));
    return m_nodes[id];
}

template <typename T>
auto Tape<T>::value(NodeId id) const -> const Mat&
{
    return node(id).value;
}

template <typename T>
OpKind Tape<T>::kind(NodeId id) const
{
    return node(id).kind;
}

template <typename T>
NodeId Tape<T>::constant(Mat value)
{
    Node n;
    n.kind = OpKind::constant;
    n.value = std::move(value);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::param(Param<T>& p)
{
    Node n;
    n.kind = OpKind::param;
    n.value = p.value;
    n.param = &p;
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::matmul(NodeId a, NodeId b)
{
    const Mat& va = value(a);
    const Mat& vb = value(b);
    if (va.cols() != vb.rows()) shape_error(OpKind::matmul, m_nodes.size(), va, vb);
    Node n;
    n.kind = OpKind::matmul;
    n.inputs = {a, b};
    n.value = va * vb;
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::matmul(std::shared_ptr<const SparseOperator> op, NodeId x)
{
    require(op != nullptr, ErrorKind::argument, "sparse matmul: null operator");
    const Mat& vx = value(x);
    require(
        op->cols() == vx.rows(),
        ErrorKind::dimension,
        "sparse_matmul at node " + std::to_string(m_nodes.size()) + ": operator " +
            shape(op->rows(), op->cols()) + " vs input " + shape(vx.rows(), vx.cols()));
    Node n;
    n.kind = OpKind::sparse_matmul;
    n.inputs = {x};
    n.value = (*op) * vx;
    n.op = std::move(op);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::add(NodeId a, NodeId b)
{
    const Mat& va = value(a);
    const Mat& vb = value(b);
    if (va.rows() != vb.rows() || va.cols() != vb.cols())
        shape_error(OpKind::add, m_nodes.size(), va, vb);
    Node n;
    n.kind = OpKind::add;
    n.inputs = {a, b};
    n.value = va + vb;
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::subtract(NodeId a, NodeId b)
{
    const Mat& va = value(a);
    const Mat& vb = value(b);
    if (va.rows() != vb.rows() || va.cols() != vb.cols())
        shape_error(OpKind::subtract, m_nodes.size(), va, vb);
    Node n;
    n.kind = OpKind::subtract;
    n.inputs = {a, b};
    n.value = va - vb;
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::scalar_multiply(NodeId s, NodeId x)
{
    const Mat& vs = value(s);
    if (vs.rows() != 1 || vs.cols() != 1)
        shape_error(OpKind::scalar_multiply, m_nodes.size(), vs, value(x));
    Node n;
    n.kind = OpKind::scalar_multiply;
    n.inputs = {s, x};
    n.value = vs(0, 0) * value(x);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::scalar_multiply(T c, NodeId x)
{
    Node n;
    n.kind = OpKind::scalar_multiply;
    n.inputs = {x};
    n.scalar = c;
    n.value = c * value(x);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::hadamard(NodeId a, NodeId b)
{
    const Mat& va = value(a);
    const Mat& vb = value(b);
    if (va.rows() != vb.rows() || va.cols() != vb.cols())
        shape_error(OpKind::hadamard, m_nodes.size(), va, vb);
    Node n;
    n.kind = OpKind::hadamard;
    n.inputs = {a, b};
    n.value = va.cwiseProduct(vb);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::transpose_conj(NodeId a)
{
    Node n;
    n.kind = OpKind::transpose_conj;
    n.inputs = {a};
    n.value = value(a).adjoint();
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::zero_pad(NodeId a, Eigen::Index cols_out)
{
    const Mat& va = value(a);
    require(
        cols_out >= va.cols(),
        ErrorKind::argument,
        "zero_pad at node " + std::to_string(m_nodes.size()) + ": d_out=" +
            std::to_string(cols_out) + " < d_in=" + std::to_string(va.cols()));
    Node n;
    n.kind = OpKind::zero_pad;
    n.inputs = {a};
    n.value = Mat::Zero(va.rows(), cols_out);
    n.value.leftCols(va.cols()) = va;
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::group_sort(NodeId a)
{
    if constexpr (is_complex_v<T>) {
        fail(ErrorKind::argument, "group_sort requires a real tape");
    } else {
        const Mat& va = value(a);
        Node n;
        n.kind = OpKind::group_sort;
        n.inputs = {a};
        n.value = va;
        const Eigen::Index pairs = va.cols() / 2;
        n.swapped.assign(static_cast<std::size_t>(va.rows() * pairs), 0);
        for (Eigen::Index r = 0; r < va.rows(); ++r) {
            for (Eigen::Index p = 0; p < pairs; ++p) {
                // Strict comparison keeps ties in their original order.
                if (va(r, 2 * p + 1) < va(r, 2 * p)) {
                    std::swap(n.value(r, 2 * p), n.value(r, 2 * p + 1));
                    n.swapped[static_cast<std::size_t>(r * pairs + p)] = 1;
                }
            }
        }
        return push(std::move(n));
    }
}

template <typename T>
NodeId Tape<T>::sin(NodeId a)
{
    Node n;
    n.kind = OpKind::sin;
    n.inputs = {a};
    n.value = value(a).array().sin().matrix();
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::relu(NodeId a)
{
    if constexpr (is_complex_v<T>) {
        fail(ErrorKind::argument, "relu requires a real tape");
    } else {
        Node n;
        n.kind = OpKind::relu;
        n.inputs = {a};
        n.value = value(a).cwiseMax(0.0);
        return push(std::move(n));
    }
}

template <typename T>
NodeId Tape<T>::truncated_exp_operator(
    std::shared_ptr<const SparseOperator> op,
    NodeId x,
    NodeId w,
    int t_max)
{
    require(op != nullptr, ErrorKind::argument, "truncated_exp_operator: null operator");
    require(t_max >= 0, ErrorKind::argument, "truncated_exp_operator: t_max must be >= 0");
    const Mat& vx = value(x);
    const Mat& vw = value(w);
    if (op->rows() != op->cols() || op->cols() != vx.rows() || vw.rows() != vx.cols() ||
        vw.cols() != vx.cols()) {
        fail(
            ErrorKind::dimension,
            "truncated_exp_operator at node " + std::to_string(m_nodes.size()) + ": operator " +
                shape(op->rows(), op->cols()) + ", X " + shape(vx.rows(), vx.cols()) + ", W " +
                shape(vw.rows(), vw.cols()));
    }
    Node n;
    n.kind = OpKind::truncated_exp_operator;
    n.inputs = {x, w};
    n.t_max = t_max;
    n.stages.assign(static_cast<std::size_t>(t_max) + 1, Mat());
    n.products.assign(static_cast<std::size_t>(t_max), Mat());
    n.stages[static_cast<std::size_t>(t_max)] = vx;
    for (int k = t_max - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        n.products[ku] = (*op) * n.stages[ku + 1];
        n.stages[ku] = vx + (n.products[ku] * vw) / static_cast<double>(k + 1);
    }
    n.value = n.stages[0];
    n.op = std::move(op);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::matrix_exp(NodeId w)
{
    const Mat& vw = value(w);
    if (vw.rows() != vw.cols()) shape_error(OpKind::matrix_exp, m_nodes.size(), vw, vw);
    Node n;
    n.kind = OpKind::matrix_exp;
    n.inputs = {w};
    n.value = mat_exp_reference(vw);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::slice_columns(NodeId a, Eigen::Index begin, Eigen::Index count)
{
    const Mat& va = value(a);
    require(
        begin >= 0 && count >= 0 && begin + count <= va.cols(),
        ErrorKind::dimension,
        "slice_columns at node " + std::to_string(m_nodes.size()) + ": columns [" +
            std::to_string(begin) + ", " + std::to_string(begin + count) + ") out of " +
            std::to_string(va.cols()));
    Node n;
    n.kind = OpKind::slice_columns;
    n.inputs = {a};
    n.a = begin;
    n.b = count;
    n.value = va.middleCols(begin, count);
    return push(std::move(n));
}

template <typename T>
NodeId Tape<T>::mse(NodeId pred, NodeId target)
{
    const Mat& vp = value(pred);
    const Mat& vt = value(target);
    if (vp.rows() != vt.rows() || vp.cols() != vt.cols())
        shape_error(OpKind::mse, m_nodes.size(), vp, vt);
    require(vp.size() > 0, ErrorKind::dimension, "mse: empty operands");
    Node n;
    n.kind = OpKind::mse;
    n.inputs = {pred, target};
    n.value = Mat::Constant(1, 1, T((vp - vt).squaredNorm() / static_cast<double>(vp.size())));
    return push(std::move(n));
}

template <typename T>
void Tape<T>::backward(NodeId loss)
{
    const Node& root = node(loss);
    require(
        root.value.rows() == 1 && root.value.cols() == 1,
        ErrorKind::argument,
        "backward: loss node " + std::to_string(loss) + " is " +
            shape(root.value.rows(), root.value.cols()) + ", expected 1x1");

    std::vector<Mat> grads(m_nodes.size());
    auto accumulate = [&](NodeId id, const auto& g) {
        Mat& slot = grads[id];
        if (slot.size() == 0) {
            slot = g;
        } else {
            slot += g;
        }
    };
    grads[loss] = Mat::Constant(1, 1, T(1.0));

    for (NodeId id = loss + 1; id-- > 0;) {
        if (grads[id].size() == 0) continue;
        const Node& n = m_nodes[id];
        const Mat& g = grads[id];
        switch (n.kind) {
        case OpKind::constant: break;
        case OpKind::param: {
            if (n.param->real_valued) {
                if constexpr (is_complex_v<T>) {
                    n.param->grad += g.real().template cast<T>();
                } else {
                    n.param->grad += g;
                }
            } else {
                n.param->grad += g;
            }
            break;
        }
        case OpKind::matmul: {
            const Mat& a = m_nodes[n.inputs[0]].value;
            const Mat& b = m_nodes[n.inputs[1]].value;
            accumulate(n.inputs[0], g * b.adjoint());
            accumulate(n.inputs[1], a.adjoint() * g);
            break;
        }
        case OpKind::sparse_matmul: {
            accumulate(n.inputs[0], Mat(n.op->transpose() * g));
            break;
        }
        case OpKind::add:
            accumulate(n.inputs[0], g);
            accumulate(n.inputs[1], g);
            break;
        case OpKind::subtract:
            accumulate(n.inputs[0], g);
            accumulate(n.inputs[1], Mat(-g));
            break;
        case OpKind::scalar_multiply: {
            if (n.inputs.size() == 2) {
                const Mat& s = m_nodes[n.inputs[0]].value;
                const Mat& x = m_nodes[n.inputs[1]].value;
                accumulate(n.inputs[0], Mat::Constant(1, 1, x.conjugate().cwiseProduct(g).sum()));
                accumulate(n.inputs[1], Mat(conj_of(s(0, 0)) * g));
            } else {
                accumulate(n.inputs[0], Mat(conj_of(n.scalar) * g));
            }
            break;
        }
        case OpKind::hadamard: {
            const Mat& a = m_nodes[n.inputs[0]].value;
            const Mat& b = m_nodes[n.inputs[1]].value;
            accumulate(n.inputs[0], Mat(b.conjugate().cwiseProduct(g)));
            accumulate(n.inputs[1], Mat(a.conjugate().cwiseProduct(g)));
            break;
        }
        case OpKind::transpose_conj: accumulate(n.inputs[0], Mat(g.adjoint())); break;
        case OpKind::zero_pad: {
            const Eigen::Index d_in = m_nodes[n.inputs[0]].value.cols();
            accumulate(n.inputs[0], Mat(g.leftCols(d_in)));
            break;
        }
        case OpKind::group_sort: {
            Mat gin = g;
            const Eigen::Index pairs = g.cols() / 2;
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                for (Eigen::Index p = 0; p < pairs; ++p) {
                    if (n.swapped[static_cast<std::size_t>(r * pairs + p)])
                        std::swap(gin(r, 2 * p), gin(r, 2 * p + 1));
                }
            }
            accumulate(n.inputs[0], gin);
            break;
        }
        case OpKind::sin: {
            const Mat& a = m_nodes[n.inputs[0]].value;
            accumulate(n.inputs[0], Mat(a.array().cos().conjugate().matrix().cwiseProduct(g)));
            break;
        }
        case OpKind::relu: {
            if constexpr (!is_complex_v<T>) {
                const Mat& a = m_nodes[n.inputs[0]].value;
                accumulate(
                    n.inputs[0],
                    Mat((a.array() > 0.0).template cast<double>().matrix().cwiseProduct(g)));
            }
            break;
        }
        case OpKind::truncated_exp_operator: {
            // p_k = X + c_k (A p_{k+1}) W with c_k = 1 / (k+1); p_T = X.
            const Mat& w = m_nodes[n.inputs[1]].value;
            const Mat w_adj = w.adjoint();
            Mat gx = Mat::Zero(g.rows(), g.cols());
            Mat gw = Mat::Zero(w.rows(), w.cols());
            Mat gk = g;
            for (int k = 0; k < n.t_max; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const double c = 1.0 / static_cast<double>(k + 1);
                gx += gk;
                gw.noalias() += c * (n.products[ku].adjoint() * gk);
                Mat next = c * (gk * w_adj);
                gk = n.op->transpose() * next;
            }
            gx += gk;
            accumulate(n.inputs[0], gx);
            accumulate(n.inputs[1], gw);
            break;
        }
        case OpKind::matrix_exp: {
            const Mat& w = m_nodes[n.inputs[0]].value;
            accumulate(n.inputs[0], frechet_exp<T>(w.adjoint(), g));
            break;
        }
        case OpKind::slice_columns: {
            const Mat& a = m_nodes[n.inputs[0]].value;
            Mat gin = Mat::Zero(a.rows(), a.cols());
            gin.middleCols(n.a, n.b) = g;
            accumulate(n.inputs[0], gin);
            break;
        }
        case OpKind::mse: {
            const Mat& p = m_nodes[n.inputs[0]].value;
            const Mat& t = m_nodes[n.inputs[1]].value;
            const double scale = 2.0 / static_cast<double>(p.size());
            const Mat d = (p - t) * (scale * g(0, 0));
            accumulate(n.inputs[0], d);
            accumulate(n.inputs[1], Mat(-d));
            break;
        }
        }
    }
}

template class Tape<double>;
template class Tape<Complex>;

template <typename T>
GradCheckReport grad_check(
    const std::function<NodeId(Tape<T>&)>& forward,
    const std::vector<Param<T>*>& params,
    double epsilon)
{
    auto evaluate = [&]() {
        Tape<T> tape;
        const NodeId loss = forward(tape);
        const T v = tape.value(loss)(0, 0);
        double re = 0.0;
        if constexpr (is_complex_v<T>) {
            re = v.real();
        } else {
            re = v;
        }
        return re;
    };

    for (Param<T>* p : params) p->zero_grad();
    {
        Tape<T> tape;
        const NodeId loss = forward(tape);
        require(
            all_finite(tape.value(loss)),
            ErrorKind::numerical,
            "grad_check: non-finite loss at the unperturbed point");
        tape.backward(loss);
    }

    GradCheckReport report;
    auto check = [&](Param<T>& p, Eigen::Index r, Eigen::Index c, bool imag, double analytic) {
        T& slot = p.value(r, c);
        const T original = slot;
        T delta = T(epsilon);
        if constexpr (is_complex_v<T>) {
            if (imag) delta = T(0.0, epsilon);
        }
        slot = original + delta;
        const double plus = evaluate();
        slot = original - delta;
        const double minus = evaluate();
        slot = original;
        if (!std::isfinite(plus) || !std::isfinite(minus)) {
            std::ostringstream msg;
            msg << "grad_check: non-finite loss perturbing " << p.name << "(" << r << ", " << c
                << (imag ? ", imag" : "") << ")";
            fail(ErrorKind::numerical, msg.str());
        }
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        const double rel = std::abs(analytic - numeric) / denom;
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_param = p.name;
            report.worst_row = r;
            report.worst_col = c;
            report.worst_imag = imag;
        }
    };

    for (Param<T>* p : params) {
        for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
            for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
                if constexpr (is_complex_v<T>) {
                    check(*p, r, c, false, p->grad(r, c).real());
                    if (!p->real_valued) check(*p, r, c, true, p->grad(r, c).imag());
                } else {
                    check(*p, r, c, false, p->grad(r, c));
                }
            }
        }
    }
    return report;
}

template GradCheckReport grad_check<double>(
    const std::function<NodeId(Tape<double>&)>&,
    const std::vector<Param<double>*>&,
    double);
template GradCheckReport grad_check<Complex>(
    const std::function<NodeId(Tape<Complex>&)>&,
    const std::vector<Param<Complex>*>&,
    double);

} // namespace smoothdyn
