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

#include <string>
#include <utility>
#include <vector>

namespace smoothdyn {

/// Simple undirected graph. Edges are stored once as (u, v) with u < v,
/// sorted; degrees are edge counts.
class Graph
{
public:
    Graph() = default;

    /// Rejects self-loops, duplicates (in either orientation) and out-of-range
    /// endpoints with an argument error.
    Graph(int n, std::vector<std::pair<int, int>> edges);

    int size() const { return m_n; }
    const std::vector<std::pair<int, int>>& edges() const { return m_edges; }
    const std::vector<int>& degrees() const { return m_degrees; }
    std::size_t edge_count() const { return m_edges.size(); }

    RealMatrix adjacency() const;

private:
    int m_n = 0;
    std::vector<std::pair<int, int>> m_edges;
    std::vector<int> m_degrees;
};

enum class LaplacianKind { normalized, combinatorial };

/// D^{-1/2} A D^{-1/2}. Throws a degree error naming the first isolated node.
RealMatrix normalized_adjacency(const Graph& g);
SparseOperator normalized_adjacency_sparse(const Graph& g);

/// (D + I)^{-1/2} (A + I) (D + I)^{-1/2}, the self-loop renormalization used by
/// common GCN implementations. Defined for isolated nodes.
SparseOperator renormalized_adjacency_sparse(const Graph& g);

/// I - A_norm (normalized) or D - A (combinatorial).
RealMatrix laplacian(const Graph& g, LaplacianKind kind = LaplacianKind::normalized);

/// tr(X^dagger (I - A) X) / ||X||_F^2 for a symmetric operator A. Shared by
/// the graph and mesh quotients.
template <typename T>
double rayleigh_quotient_operator(const SparseOperator& a_norm, const Matrix<T>& x);

template <typename T>
double rayleigh_quotient(const Graph& g, const Matrix<T>& x);

/// 1/2 sum over ordered pairs (u, v) in E of ||x_u/sqrt(d_u) - x_v/sqrt(d_v)||^2,
/// divided by ||X||_F^2.
template <typename T>
double rayleigh_quotient_edge_form(const Graph& g, const Matrix<T>& x);

/// 4-neighbour lattice; node (r, c) has index r * cols + c.
Graph grid_graph(int rows, int cols);

/// {"n": int, "edges": [[u, v], ...]}
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

} // namespace smoothdyn
