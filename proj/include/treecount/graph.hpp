#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treecount/error.hpp"

namespace treecount {

using VertexId = std::size_t;
using EdgeId = std::size_t;

/// Supported edge-weight range; the estimator rejects graphs outside it.
inline constexpr double kMinWeight = 1e-9;
inline constexpr double kMaxWeight = 1e9;

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double w = 1.0;

  bool is_loop() const noexcept { return u == v; }
  VertexId other(VertexId x) const noexcept { return x == u ? v : u; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted undirected multigraph. Edge ids are positions in `edges()` and are
/// stable for the lifetime of the value; operations that delete edges return a
/// new graph whose surviving edges keep their relative order.
class Graph {
 public:
  Graph() = default;

  Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      if (e.u >= n_ || e.v >= n_) {
        throw PreconditionError("edge " + std::to_string(i) + " has an endpoint outside [0, " +
                                std::to_string(n_) + ")");
      }
      if (!std::isfinite(e.w) || e.w <= 0.0) {
        throw PreconditionError("edge " + std::to_string(i) + " has non-positive or non-finite weight");
      }
    }
    build_incidence();
  }

  explicit Graph(std::size_t n) : Graph(n, {}) {}

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Ids of the edges incident to `v` (a self-loop is listed once).
  std::span<const EdgeId> incident(VertexId v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }

  /// Number of distinct neighbours of `v`, ignoring self-loops.
  std::size_t combinatorial_degree(VertexId v) const {
    std::vector<VertexId> nbrs;
    for (EdgeId id : incident(v)) {
      if (!edges_[id].is_loop()) nbrs.push_back(edges_[id].other(v));
    }
    std::sort(nbrs.begin(), nbrs.end());
    return static_cast<std::size_t>(std::unique(nbrs.begin(), nbrs.end()) - nbrs.begin());
  }

  double total_weight() const {
    return std::accumulate(edges_.begin(), edges_.end(), 0.0,
                           [](double acc, const Edge& e) { return acc + e.w; });
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  void build_incidence() {
    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offsets_[e.u + 1];
      if (!e.is_loop()) ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    incidence_.resize(offsets_[n_]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
      const Edge& e = edges_[id];
      incidence_[cursor[e.u]++] = id;
      if (!e.is_loop()) incidence_[cursor[e.v]++] = id;
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> incidence_;
};

/// True iff the graph is connected. Graphs with at most one vertex count as connected.
inline bool validate_connected(const Graph& g) {
  const std::size_t n = g.num_vertices();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    for (EdgeId id : g.incident(x)) {
      const VertexId y = g.edge(id).other(x);
      if (!seen[y]) {
        seen[y] = 1;
        ++reached;
        stack.push_back(y);
      }
    }
  }
  return reached == n;
}

inline void require_connected(const Graph& g, const char* context) {
  if (!validate_connected(g)) throw DisconnectedGraphError(context);
}

/// Throws unless every weight lies in [kMinWeight, kMaxWeight].
inline void require_weight_range(const Graph& g) {
  for (const Edge& e : g.edges()) {
    if (e.w < kMinWeight || e.w > kMaxWeight) {
      throw PreconditionError("edge weight " + std::to_string(e.w) + " outside supported range [1e-9, 1e9]");
    }
  }
}

/// Drops self-loops and merges parallel edges by summing their weights.
/// Merged edges take the position and orientation of their first occurrence.
inline Graph normalize(const Graph& g) {
  std::vector<Edge> out;
  out.reserve(g.num_edges());
  std::map<std::pair<VertexId, VertexId>, std::size_t> slot;
  for (const Edge& e : g.edges()) {
    if (e.is_loop()) continue;
    const auto key = std::minmax(e.u, e.v);
    auto [it, fresh] = slot.try_emplace({key.first, key.second}, out.size());
    if (fresh) {
      out.push_back(e);
    } else {
      out[it->second].w += e.w;
    }
  }
  return Graph(g.num_vertices(), std::move(out));
}

inline bool is_simple(const Graph& g) {
  std::vector<std::pair<VertexId, VertexId>> keys;
  keys.reserve(g.num_edges());
  for (const Edge& e : g.edges()) {
    if (e.is_loop()) return false;
    keys.push_back(std::minmax(e.u, e.v));
  }
  std::sort(keys.begin(), keys.end());
  return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

/// Deletes the listed edges (duplicates allowed); the vertex set is unchanged.
/// The result may be disconnected; callers that need connectivity re-check it.
inline Graph remove_edges(const Graph& g, std::span<const EdgeId> ids) {
  std::vector<char> drop(g.num_edges(), 0);
  for (EdgeId id : ids) {
    if (id >= g.num_edges()) {
      throw PreconditionError("remove_edges: unknown edge id " + std::to_string(id));
    }
    drop[id] = 1;
  }
  std::vector<Edge> kept;
  kept.reserve(g.num_edges());
  for (EdgeId id = 0; id < g.num_edges(); ++id) {
    if (!drop[id]) kept.push_back(g.edge(id));
  }
  return Graph(g.num_vertices(), std::move(kept));
}

inline std::size_t min_combinatorial_degree(const Graph& g) {
  std::size_t best = g.num_vertices() == 0 ? 0 : g.num_edges() * 2 + 1;
  for (VertexId v = 0; v < g.num_vertices(); ++v) best = std::min(best, g.combinatorial_degree(v));
  return best;
}

}  // namespace treecount
