#pragma once

#include <gne/types.hpp>

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gne {

/// Undirected communication graph with a fixed edge orientation.
///
/// Every edge is stored as (source, sink) with source < sink, so the incidence
/// matrix is a deterministic function of the edge set. Edge labels follow the
/// order in which edges were supplied.
class CommGraph {
 public:
  struct Edge {
    Index source;
    Index sink;
  };

  CommGraph() = default;

  CommGraph(Index num_nodes, const std::vector<std::pair<Index, Index>>& edges) : num_nodes_(num_nodes) {
    if (num_nodes < 1) throw InvalidParameter("graph needs at least one node");
    edges_.reserve(edges.size());
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) {
        throw InvalidParameter("edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
      }
      if (a == b) throw InvalidParameter("self-loop at node " + std::to_string(a));
      edges_.push_back({std::min(a, b), std::max(a, b)});
    }
    build_adjacency();
  }

  Index num_nodes() const { return num_nodes_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(Index l) const { return edges_[static_cast<std::size_t>(l)]; }

  /// Neighbors of i in ascending order.
  std::span<const Index> neighbors(Index i) const { return neighbors_[static_cast<std::size_t>(i)]; }
  std::span<const Index> out_edges(Index i) const { return out_[static_cast<std::size_t>(i)]; }
  std::span<const Index> in_edges(Index i) const { return in_[static_cast<std::size_t>(i)]; }
  Index degree(Index i) const { return static_cast<Index>(neighbors_[static_cast<std::size_t>(i)].size()); }

  /// Position of `neighbor` in neighbors(i), or -1.
  Index neighbor_slot(Index i, Index neighbor) const {
    const auto nb = neighbors(i);
    const auto it = std::lower_bound(nb.begin(), nb.end(), neighbor);
    if (it == nb.end() || *it != neighbor) return -1;
    return static_cast<Index>(it - nb.begin());
  }

  /// Position of edge l within out_edges(edge(l).source).
  Index out_slot(Index l) const { return out_slot_[static_cast<std::size_t>(l)]; }

  double mean_degree() const { return num_nodes_ ? 2.0 * static_cast<double>(num_edges()) / static_cast<double>(num_nodes_) : 0.0; }

  /// Connected when orientation is ignored.
  bool is_connected() const {
    if (num_nodes_ <= 1) return true;
    std::vector<char> seen(static_cast<std::size_t>(num_nodes_), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index w : neighbors(v)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == num_nodes_;
  }

  static CommGraph path(Index n) {
    std::vector<std::pair<Index, Index>> e;
    for (Index i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return CommGraph(n, e);
  }

  static CommGraph complete(Index n) {
    std::vector<std::pair<Index, Index>> e;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return CommGraph(n, e);
  }

 private:
  void build_adjacency() {
    const auto n = static_cast<std::size_t>(num_nodes_);
    neighbors_.assign(n, {});
    out_.assign(n, {});
    in_.assign(n, {});
    out_slot_.assign(edges_.size(), 0);
    for (std::size_t l = 0; l < edges_.size(); ++l) {
      const auto [s, t] = edges_[l];
      auto& ns = neighbors_[static_cast<std::size_t>(s)];
      if (std::find(ns.begin(), ns.end(), t) != ns.end()) {
        throw InvalidParameter("duplicate edge (" + std::to_string(s) + "," + std::to_string(t) + ")");
      }
      ns.push_back(t);
      neighbors_[static_cast<std::size_t>(t)].push_back(s);
      out_slot_[l] = static_cast<Index>(out_[static_cast<std::size_t>(s)].size());
      out_[static_cast<std::size_t>(s)].push_back(static_cast<Index>(l));
      in_[static_cast<std::size_t>(t)].push_back(static_cast<Index>(l));
    }
    for (auto& ns : neighbors_) std::sort(ns.begin(), ns.end());
  }

  Index num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Index>> neighbors_;
  std::vector<std::vector<Index>> out_;
  std::vector<std::vector<Index>> in_;
  std::vector<Index> out_slot_;
};

/// E x N incidence matrix: +1 at the source, -1 at the sink of every edge.
template <typename Scalar = double>
Matrix<Scalar> incidence_matrix(const CommGraph& graph) {
  Matrix<Scalar> V = Matrix<Scalar>::Zero(graph.num_edges(), graph.num_nodes());
  for (Index l = 0; l < graph.num_edges(); ++l) {
    V(l, graph.edge(l).source) = Scalar(1);
    V(l, graph.edge(l).sink) = Scalar(-1);
  }
  return V;
}

/// Node Laplacian, equal entry-wise to V^T V.
template <typename Scalar = double>
Matrix<Scalar> laplacian(const CommGraph& graph) {
  const Index n = graph.num_nodes();
  Matrix<Scalar> L = Matrix<Scalar>::Zero(n, n);
  for (const auto& e : graph.edges()) {
    L(e.source, e.source) += Scalar(1);
    L(e.sink, e.sink) += Scalar(1);
    L(e.source, e.sink) -= Scalar(1);
    L(e.sink, e.source) -= Scalar(1);
  }
  return L;
}

template <typename Scalar = double>
Scalar laplacian_max_eigenvalue(const CommGraph& graph) {
  if (graph.num_edges() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(laplacian<Scalar>(graph), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

/// Stacked (L kron I_m) lambda, i.e. d_i = sum_{j in N_i} (lambda_i - lambda_j).
template <typename Derived>
auto graph_disagreement(const CommGraph& graph, Index m, const Eigen::MatrixBase<Derived>& lambda) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> d = Vector<Scalar>::Zero(lambda.size());
  for (const auto& e : graph.edges()) {
    const Vector<Scalar> diff = lambda.segment(e.source * m, m) - lambda.segment(e.sink * m, m);
    d.segment(e.source * m, m) += diff;
    d.segment(e.sink * m, m) -= diff;
  }
  return d;
}

}  // namespace gne
