#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"

namespace treecount {

struct EliminationResult {
  Graph reduced;       ///< min combinatorial degree >= 3, or at most one vertex
  double delta = 0.0;  ///< log T(original) = log T(reduced) + delta
  std::size_t eliminated = 0;
};

/// Exact removal of degree-1 and degree-2 vertices.
///
/// A leaf with edge weight w contributes log w. A degree-2 vertex with edge
/// weights w1, w2 is replaced by one edge of weight w1*w2/(w1+w2) between its
/// neighbours and contributes log(w1+w2); the new edge is summed into any
/// existing edge between those neighbours. Neighbours whose degree drops are
/// re-queued, so the whole pass is linear in m (expected, hashing).
inline EliminationResult eliminate_low_degree(const Graph& g) {
  require_connected(g, "eliminate_low_degree");
  const std::size_t n = g.num_vertices();

  // Merged adjacency: parallel edges summed, loops dropped.
  std::vector<std::unordered_map<VertexId, double>> adj(n);
  for (const Edge& e : g.edges()) {
    if (e.is_loop()) continue;
    adj[e.u][e.v] += e.w;
    adj[e.v][e.u] += e.w;
  }

  std::vector<char> alive(n, 1), queued(n, 0);
  std::size_t alive_count = n;
  std::deque<VertexId> work;
  auto enqueue = [&](VertexId x) {
    if (!queued[x] && adj[x].size() <= 2) {
      queued[x] = 1;
      work.push_back(x);
    }
  };
  for (VertexId x = 0; x < n; ++x) enqueue(x);

  EliminationResult res;
  while (!work.empty() && alive_count > 1) {
    const VertexId x = work.front();
    work.pop_front();
    queued[x] = 0;
    if (!alive[x]) continue;

    auto& nbrs = adj[x];
    if (nbrs.empty()) {
      throw DisconnectedGraphError("isolated vertex during elimination");
    } else if (nbrs.size() == 1) {
      const auto [y, w] = *nbrs.begin();
      res.delta += std::log(w);
      adj[y].erase(x);
      enqueue(y);
    } else if (nbrs.size() == 2) {
      auto it = nbrs.begin();
      const auto [a, wa] = *it++;
      const auto [b, wb] = *it;
      res.delta += std::log(wa + wb);
      adj[a].erase(x);
      adj[b].erase(x);
      const double merged = wa * wb / (wa + wb);
      adj[a][b] += merged;
      adj[b][a] += merged;
      enqueue(a);
      enqueue(b);
    } else {
      continue;
    }
    nbrs.clear();
    alive[x] = 0;
    --alive_count;
    ++res.eliminated;
  }

  std::vector<VertexId> label(n, 0);
  std::size_t next = 0;
  for (VertexId x = 0; x < n; ++x) {
    if (alive[x]) label[x] = next++;
  }
  std::vector<Edge> edges;
  for (VertexId x = 0; x < n; ++x) {
    if (!alive[x]) continue;
    std::vector<std::pair<VertexId, double>> row;
    for (const auto& [y, w] : adj[x]) {
      if (y > x) row.emplace_back(y, w);
    }
    std::sort(row.begin(), row.end());
    for (const auto& [y, w] : row) edges.push_back({label[x], label[y], w});
  }
  res.reduced = Graph(next, std::move(edges));
  return res;
}

}  // namespace treecount
