#pragma once

// Graph families used by the verification suites, tests and benchmarks.

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"
#include "treecount/random.hpp"

namespace treecount::gen {

inline Graph complete(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) edges.push_back({u, v, w});
  }
  return Graph(n, std::move(edges));
}

inline Graph cycle(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (VertexId u = 0; u < n; ++u) edges.push_back({u, (u + 1) % n, w});
  return Graph(n, std::move(edges));
}

inline Graph path(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (VertexId u = 0; u + 1 < n; ++u) edges.push_back({u, u + 1, w});
  return Graph(n, std::move(edges));
}

inline Graph triangle(double w = 1.0) { return cycle(3, w); }

inline double pick_weight(const std::vector<double>& weights, Rng& rng) {
  if (weights.empty()) return 1.0;
  return weights[std::uniform_int_distribution<std::size_t>(0, weights.size() - 1)(rng)];
}

/// Random spanning tree (random attachment on a shuffled vertex order) plus
/// each remaining pair independently with probability p. Always connected
/// and simple.
inline Graph random_connected(std::size_t n, double p, const std::vector<double>& weights, Rng& rng) {
  if (n == 0) throw PreconditionError("random_connected: n must be positive");
  std::vector<VertexId> order(n);
  for (VertexId i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  std::vector<Edge> edges;
  auto add = [&](VertexId a, VertexId b) {
    used[a][b] = used[b][a] = 1;
    edges.push_back({std::min(a, b), std::max(a, b), pick_weight(weights, rng)});
  };
  for (std::size_t i = 1; i < n; ++i) {
    add(order[i], order[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
  }
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      if (!used[u][v] && uniform01(rng) < p) add(u, v);
    }
  }
  return Graph(n, std::move(edges));
}

/// Connected simple graph with exactly m edges: random tree, then uniformly
/// random extra pairs.
inline Graph random_connected_m(std::size_t n, std::size_t m, const std::vector<double>& weights, Rng& rng) {
  if (n == 0) throw PreconditionError("random_connected_m: n must be positive");
  if (m + 1 < n || m > n * (n - 1) / 2) throw PreconditionError("random_connected_m: edge count out of range");
  Graph tree = random_connected(n, 0.0, weights, rng);
  std::vector<Edge> edges(tree.edges().begin(), tree.edges().end());
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  for (const Edge& e : edges) used[e.u][e.v] = used[e.v][e.u] = 1;
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  while (edges.size() < m) {
    const VertexId a = pick(rng), b = pick(rng);
    if (a == b || used[a][b]) continue;
    used[a][b] = used[b][a] = 1;
    edges.push_back({std::min(a, b), std::max(a, b), pick_weight(weights, rng)});
  }
  return Graph(n, std::move(edges));
}

/// Random d-regular simple connected graph by the pairing model, restarting
/// on loops, repeated pairs or a disconnected result.
inline Graph random_regular(std::size_t n, std::size_t d, Rng& rng, std::size_t max_restarts = 1000) {
  if (d >= n || (n * d) % 2 != 0) throw PreconditionError("random_regular: need d < n and n*d even");
  std::vector<VertexId> points(n * d);
  for (std::size_t attempt = 0; attempt < max_restarts; ++attempt) {
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = i / d;
    std::shuffle(points.begin(), points.end(), rng);
    std::vector<std::pair<VertexId, VertexId>> pairs;
    pairs.reserve(points.size() / 2);
    bool ok = true;
    for (std::size_t i = 0; i < points.size() && ok; i += 2) {
      const VertexId a = std::min(points[i], points[i + 1]);
      const VertexId b = std::max(points[i], points[i + 1]);
      if (a == b) ok = false;
      pairs.emplace_back(a, b);
    }
    if (!ok) continue;
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) continue;
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
    Graph g(n, std::move(edges));
    if (validate_connected(g)) return g;
  }
  throw Error("random_regular: too many restarts");
}

/// Regular graph of large size without restarting the whole pairing: pair
/// points greedily, then repair loops and repeated pairs by random switches.
inline Graph random_regular_switched(std::size_t n, std::size_t d, Rng& rng) {
  if (d >= n || (n * d) % 2 != 0) throw PreconditionError("random_regular_switched: need d < n and n*d even");
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    std::vector<VertexId> points(n * d);
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = i / d;
    std::shuffle(points.begin(), points.end(), rng);
    const std::size_t m = points.size() / 2;
    std::vector<std::pair<VertexId, VertexId>> pairs(m);
    for (std::size_t i = 0; i < m; ++i) pairs[i] = {points[2 * i], points[2 * i + 1]};

    auto key = [](VertexId a, VertexId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
    std::vector<std::pair<VertexId, VertexId>> sorted;
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    bool done = false;
    for (std::size_t round = 0; round < 1000 && !done; ++round) {
      sorted.clear();
      for (auto [a, b] : pairs) sorted.push_back(key(a, b));
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> bad;
      for (std::size_t i = 0; i < m; ++i) {
        auto k = key(pairs[i].first, pairs[i].second);
        if (k.first == k.second) {
          bad.push_back(i);
          continue;
        }
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), k);
        if (lo + 1 != sorted.end() && *(lo + 1) == k) bad.push_back(i);
      }
      if (bad.empty()) {
        done = true;
        break;
      }
      for (std::size_t i : bad) {
        const std::size_t j = pick(rng);
        if (i == j) continue;
        std::swap(pairs[i].second, pairs[j].second);
      }
    }
    if (!done) continue;
    std::vector<Edge> edges;
    edges.reserve(m);
    for (auto [a, b] : sorted) edges.push_back({a, b, 1.0});
    Graph g(n, std::move(edges));
    if (validate_connected(g)) return g;
  }
  throw Error("random_regular_switched: could not build a simple connected graph");
}

}  // namespace treecount::gen
