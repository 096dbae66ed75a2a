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

#include <smoothdyn/graph.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace smoothdyn {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges)
    : m_n(n)
    , m_degrees(static_cast<std::size_t>(std::max(n, 0)), 0)
{
    require(n >= 0, ErrorKind::argument, "graph: negative node count");
    m_edges.reserve(edges.size());
    for (auto [u, v] : edges) {
        require(
            u >= 0 && v >= 0 && u < n && v < n,
            ErrorKind::argument,
            "graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                ") references a node outside [0, " + std::to_string(n) + ")");
        require(u != v, ErrorKind::argument, "graph: self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        m_edges.emplace_back(u, v);
    }
    std::sort(m_edges.begin(), m_edges.end());
    const auto dup = std::adjacent_find(m_edges.begin(), m_edges.end());
    if (dup != m_edges.end()) {
        fail(
            ErrorKind::argument,
            "graph: duplicate edge (" + std::to_string(dup->first) + ", " +
                std::to_string(dup->second) + ")");
    }
    for (const auto& [u, v] : m_edges) {
        ++m_degrees[static_cast<std::size_t>(u)];
        ++m_degrees[static_cast<std::size_t>(v)];
    }
}

RealMatrix Graph::adjacency() const
{
    RealMatrix a = RealMatrix::Zero(m_n, m_n);
    for (const auto& [u, v] : m_edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

namespace {

std::vector<double> inv_sqrt_degrees(const Graph& g)
{
    std::vector<double> out(static_cast<std::size_t>(g.size()));
    for (int u = 0; u < g.size(); ++u) {
        const int d = g.degrees()[static_cast<std::size_t>(u)];
        require(d > 0, ErrorKind::degree, "isolated node " + std::to_string(u) + " has degree 0");
        out[static_cast<std::size_t>(u)] = 1.0 / std::sqrt(static_cast<double>(d));
    }
    return out;
}

} // namespace

RealMatrix normalized_adjacency(const Graph& g)
{
    const auto s = inv_sqrt_degrees(g);
    RealMatrix a = RealMatrix::Zero(g.size(), g.size());
    for (const auto& [u, v] : g.edges()) {
        const double w = s[static_cast<std::size_t>(u)] * s[static_cast<std::size_t>(v)];
        a(u, v) = w;
        a(v, u) = w;
    }
    return a;
}

SparseOperator normalized_adjacency_sparse(const Graph& g)
{
    const auto s = inv_sqrt_degrees(g);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edge_count());
    for (const auto& [u, v] : g.edges()) {
        const double w = s[static_cast<std::size_t>(u)] * s[static_cast<std::size_t>(v)];
        triplets.emplace_back(u, v, w);
        triplets.emplace_back(v, u, w);
    }
    SparseOperator a(g.size(), g.size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

SparseOperator renormalized_adjacency_sparse(const Graph& g)
{
    std::vector<double> s(static_cast<std::size_t>(g.size()));
    for (int u = 0; u < g.size(); ++u)
        s[static_cast<std::size_t>(u)] =
            1.0 / std::sqrt(static_cast<double>(g.degrees()[static_cast<std::size_t>(u)] + 1));
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edge_count() + static_cast<std::size_t>(g.size()));
    for (int u = 0; u < g.size(); ++u) {
        const double su = s[static_cast<std::size_t>(u)];
        triplets.emplace_back(u, u, su * su);
    }
    for (const auto& [u, v] : g.edges()) {
        const double w = s[static_cast<std::size_t>(u)] * s[static_cast<std::size_t>(v)];
        triplets.emplace_back(u, v, w);
        triplets.emplace_back(v, u, w);
    }
    SparseOperator a(g.size(), g.size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

RealMatrix laplacian(const Graph& g, LaplacianKind kind)
{
    if (kind == LaplacianKind::normalized) {
        return RealMatrix::Identity(g.size(), g.size()) - normalized_adjacency(g);
    }
    RealMatrix l = -g.adjacency();
    for (int u = 0; u < g.size(); ++u) l(u, u) = g.degrees()[static_cast<std::size_t>(u)];
    return l;
}

template <typename T>
double rayleigh_quotient_operator(const SparseOperator& a_norm, const Matrix<T>& x)
{
    require(
        a_norm.rows() == x.rows() && a_norm.cols() == x.rows(),
        ErrorKind::dimension,
        "rayleigh quotient: operator is " + std::to_string(a_norm.rows()) + "x" +
            std::to_string(a_norm.cols()) + " but features have " + std::to_string(x.rows()) +
            " rows");
    const double denom = x.squaredNorm();
    require(denom > 0.0, ErrorKind::undefined, "rayleigh quotient undefined for zero features");
    const Matrix<T> ax = a_norm * x;
    // tr(X^dagger A X) is real for symmetric A.
    const double cross = std::real(x.cwiseProduct(ax.conjugate()).sum());
    return (denom - cross) / denom;
}

template <typename T>
double rayleigh_quotient(const Graph& g, const Matrix<T>& x)
{
    require(
        x.rows() == g.size(),
        ErrorKind::dimension,
        "rayleigh quotient: graph has " + std::to_string(g.size()) + " nodes, features have " +
            std::to_string(x.rows()) + " rows");
    return rayleigh_quotient_operator(normalized_adjacency_sparse(g), x);
}

template <typename T>
double rayleigh_quotient_edge_form(const Graph& g, const Matrix<T>& x)
{
    require(
        x.rows() == g.size(),
        ErrorKind::dimension,
        "rayleigh quotient: graph has " + std::to_string(g.size()) + " nodes, features have " +
            std::to_string(x.rows()) + " rows");
    const double denom = x.squaredNorm();
    require(denom > 0.0, ErrorKind::undefined, "rayleigh quotient undefined for zero features");
    const auto s = inv_sqrt_degrees(g);
    double sum = 0.0;
    for (const auto& [u, v] : g.edges()) {
        const double diff =
            (x.row(u) * s[static_cast<std::size_t>(u)] - x.row(v) * s[static_cast<std::size_t>(v)])
                .squaredNorm();
        // (u, v) and (v, u) contribute equally.
        sum += 2.0 * diff;
    }
    return 0.5 * sum / denom;
}

template double rayleigh_quotient_operator(const SparseOperator&, const Matrix<double>&);
template double rayleigh_quotient_operator(const SparseOperator&, const Matrix<Complex>&);
template double rayleigh_quotient(const Graph&, const Matrix<double>&);
template double rayleigh_quotient(const Graph&, const Matrix<Complex>&);
template double rayleigh_quotient_edge_form(const Graph&, const Matrix<double>&);
template double rayleigh_quotient_edge_form(const Graph&, const Matrix<Complex>&);

Graph grid_graph(int rows, int cols)
{
    require(rows >= 1 && cols >= 1, ErrorKind::argument, "grid_graph: dimensions must be >= 1");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(rows * (cols - 1) + cols * (rows - 1)));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int id = r * cols + c;
            if (c + 1 < cols) edges.emplace_back(id, id + 1);
            if (r + 1 < rows) edges.emplace_back(id, id + cols);
        }
    }
    return Graph(rows * cols, std::move(edges));
}

std::string graph_to_json(const Graph& g)
{
    nlohmann::json j;
    j["n"] = g.size();
    j["edges"] = nlohmann::json::array();
    for (const auto& [u, v] : g.edges()) j["edges"].push_back({u, v});
    return j.dump();
}

Graph graph_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, std::string("graph json: ") + e.what());
    }
    require(j.is_object(), ErrorKind::io, "graph json: expected an object");
    for (const auto& [key, _] : j.items()) {
        require(key == "n" || key == "edges", ErrorKind::config, "graph json: unknown key '" + key + "'");
    }
    require(
        j.contains("n") && j["n"].is_number_integer(),
        ErrorKind::io,
        "graph json: missing integer field 'n'");
    require(
        j.contains("edges") && j["edges"].is_array(),
        ErrorKind::io,
        "graph json: missing array field 'edges'");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j["edges"]) {
        require(
            e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer(),
            ErrorKind::io,
            "graph json: each edge must be [u, v]");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph(j["n"].get<int>(), std::move(edges));
}

} // namespace smoothdyn
