#pragma once

// Ground-truth computations for small and medium graphs. Everything here is
// dense and O(n^3); nothing in this header is used on the estimator's hot path
// except exact_log_tree_count for the recursion base case.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"

namespace treecount {

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    if (e.is_loop()) continue;
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
  }
  return L;
}

/// log T(G) as the log-determinant of the Laplacian with vertex 0 grounded,
/// via a pivoted LDL^T factorization.
inline double exact_log_tree_count(const Graph& g) {
  const std::size_t n = g.num_vertices();
  if (n == 0) throw PreconditionError("exact_log_tree_count: empty vertex set");
  if (n == 1) return 0.0;
  require_connected(g, "exact_log_tree_count");

  const Eigen::MatrixXd L = dense_laplacian(g);
  const auto k = static_cast<Eigen::Index>(n - 1);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(L.bottomRightCorner(k, k));
  if (ldlt.info() != Eigen::Success) throw Error("exact_log_tree_count: factorization failed");

  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = L.diagonal().maxCoeff();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(d(i) > 1e-14 * scale)) {
      throw Error("exact_log_tree_count: grounded Laplacian is numerically singular (pivot " +
                  std::to_string(d(i)) + ")");
    }
    log_det += std::log(d(i));
  }
  return log_det;
}

inline constexpr std::size_t kBruteForceMaxVertices = 10;

namespace detail {

struct SmallWeights {
  std::array<std::array<double, kBruteForceMaxVertices>, kBruteForceMaxVertices> w{};
  int n = 0;
};

inline bool small_connected(const SmallWeights& g) {
  unsigned seen = 1U, frontier = 1U;
  while (frontier) {
    unsigned next = 0;
    for (int i = 0; i < g.n; ++i) {
      if (!(frontier >> i & 1U)) continue;
      for (int j = 0; j < g.n; ++j) {
        if (g.w[i][j] > 0.0 && !(seen >> j & 1U)) next |= 1U << j;
      }
    }
    seen |= next;
    frontier = next;
  }
  return seen == (1U << g.n) - 1U;
}

// T(G) = T(G - e) + w_e * T(G / e), contracting with parallel edges summed.
inline double contraction_deletion(const SmallWeights& g) {
  if (g.n == 1) return 1.0;
  if (!small_connected(g)) return 0.0;

  // Branch on an edge at a minimum-degree vertex; keeps the recursion shallow.
  int best = 0, best_deg = g.n + 1;
  for (int i = 0; i < g.n; ++i) {
    int deg = 0;
    for (int j = 0; j < g.n; ++j) deg += g.w[i][j] > 0.0;
    if (deg < best_deg) best = i, best_deg = deg;
  }
  int other = 0;
  while (!(g.w[best][other] > 0.0)) ++other;
  const int i = std::min(best, other), j = std::max(best, other);
  const double w = g.w[i][j];

  SmallWeights del = g;
  del.w[i][j] = del.w[j][i] = 0.0;

  SmallWeights con;
  con.n = g.n - 1;
  auto map = [j](int x) { return x < j ? x : x - 1; };
  for (int a = 0; a < g.n; ++a) {
    for (int b = 0; b < g.n; ++b) {
      if (a == b) continue;
      const int ca = a == j ? i : a, cb = b == j ? i : b;
      if (ca == cb) continue;
      con.w[map(ca)][map(cb)] += g.w[a][b];
    }
  }
  return contraction_deletion(del) + w * contraction_deletion(con);
}

}  // namespace detail

/// Sum over spanning trees of the product of edge weights, by contraction and
/// deletion. Refuses graphs with more than 10 vertices.
inline double brute_force_tree_weight(const Graph& g) {
  if (g.num_vertices() > kBruteForceMaxVertices) {
    throw PreconditionError("brute_force_tree_weight: refusing n = " + std::to_string(g.num_vertices()) +
                            " > 10");
  }
  if (g.num_vertices() == 0) return 0.0;
  detail::SmallWeights s;
  s.n = static_cast<int>(g.num_vertices());
  for (const Edge& e : g.edges()) {
    if (e.is_loop()) continue;
    s.w[e.u][e.v] += e.w;
    s.w[e.v][e.u] += e.w;
  }
  return detail::contraction_deletion(s);
}

/// Inverse of the vertex-0-grounded Laplacian, embedded with a zero row and
/// column for vertex 0. For b orthogonal to the ones vector, b^T G c = b^T L^+ c.
inline Eigen::MatrixXd grounded_inverse_embedding(const Graph& g) {
  require_connected(g, "grounded_inverse_embedding");
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  if (n <= 1) return G;
  const Eigen::MatrixXd L = dense_laplacian(g);
  const Eigen::LLT<Eigen::MatrixXd> llt(L.bottomRightCorner(n - 1, n - 1));
  if (llt.info() != Eigen::Success) throw Error("grounded Laplacian is not positive definite");
  G.bottomRightCorner(n - 1, n - 1) = llt.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
  return G;
}

/// L^+ reconstructed from the grounded inverse by mean-centering rows and columns.
inline Eigen::MatrixXd dense_pseudoinverse(const Graph& g) {
  const Eigen::MatrixXd G = grounded_inverse_embedding(g);
  const auto n = G.rows();
  if (n == 0) return G;
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return P * G * P;
}

/// |F|x|F| matrix of w_e^{1/2} b(e)^T L^+ b(f) w_f^{1/2}; diagonal = leverage scores.
struct CorrelationMatrix {
  std::vector<EdgeId> subset;
  Eigen::MatrixXd values;
};

namespace detail {

inline double bilinear(const Eigen::MatrixXd& G, const Edge& e, const Edge& f) {
  return G(e.u, f.u) - G(e.u, f.v) - G(e.v, f.u) + G(e.v, f.v);
}

}  // namespace detail

inline CorrelationMatrix exact_correlations(const Graph& g, std::span<const EdgeId> subset) {
  if (subset.empty()) throw PreconditionError("exact_correlations: empty subset");
  for (EdgeId id : subset) {
    if (id >= g.num_edges()) throw PreconditionError("exact_correlations: unknown edge id " + std::to_string(id));
  }
  const Eigen::MatrixXd G = grounded_inverse_embedding(g);
  const auto k = static_cast<Eigen::Index>(subset.size());
  CorrelationMatrix c{{subset.begin(), subset.end()}, Eigen::MatrixXd(k, k)};
  for (Eigen::Index a = 0; a < k; ++a) {
    const Edge& e = g.edge(subset[a]);
    for (Eigen::Index b = a; b < k; ++b) {
      const Edge& f = g.edge(subset[b]);
      const double v = std::sqrt(e.w * f.w) * detail::bilinear(G, e, f);
      c.values(a, b) = c.values(b, a) = v;
    }
  }
  return c;
}

/// Exact leverage score of every edge, in id order.
inline std::vector<double> exact_leverage_scores(const Graph& g) {
  const Eigen::MatrixXd G = grounded_inverse_embedding(g);
  std::vector<double> tau;
  tau.reserve(g.num_edges());
  for (const Edge& e : g.edges()) tau.push_back(e.is_loop() ? 0.0 : e.w * detail::bilinear(G, e, e));
  return tau;
}

/// Largest off-diagonal absolute row sum: the smallest rho for which the
/// subset is rho-correlated.
inline double rho_of(const Eigen::MatrixXd& c) {
  double rho = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (j != i) s += std::abs(c(i, j));
    }
    rho = std::max(rho, s);
  }
  return rho;
}

inline double rho_of(const CorrelationMatrix& c) { return rho_of(c.values); }

/// log det of a square matrix via partial-pivot LU; throws unless det > 0.
inline double log_det_positive(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  double log_abs = 0.0;
  int sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double u = packed(i, i);
    if (u == 0.0) throw Error("log_det_positive: singular matrix");
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  if (sign < 0) throw Error("log_det_positive: determinant is negative");
  return log_abs;
}

struct LogDetComparison {
  double approx = 0.0;  ///< sum of log diagonal entries
  double exact = 0.0;   ///< log det
};

/// Both sides of the diagonal-dominance log-det approximation. Requires
/// diagonal entries >= 0.1 and off-diagonal absolute row sums <= 0.01.
inline LogDetComparison logdet_diag_approx(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw PreconditionError("logdet_diag_approx: matrix must be square");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) < 0.1) throw PreconditionError("logdet_diag_approx: diagonal entry below 0.1");
  }
  if (rho_of(m) > 0.01) throw PreconditionError("logdet_diag_approx: off-diagonal row sum exceeds 0.01");
  LogDetComparison out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.approx += std::log(m(i, i));
  out.exact = log_det_positive(m);
  return out;
}

}  // namespace treecount
