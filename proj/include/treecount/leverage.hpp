#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"
#include "treecount/laplacian_solver.hpp"
#include "treecount/random.hpp"

namespace treecount {

enum class LeverageRegime {
  kMultiplicative,  ///< (1-eps) est <= tau <= (1+eps) est
  kAdditive,        ///< |est - tau| <= 2 rho
};

struct LeverageEstimates {
  std::vector<double> values;
  LeverageRegime regime = LeverageRegime::kMultiplicative;
  double parameter = 0.0;  ///< eps or rho, depending on the regime
};

struct LeverageSketchOptions {
  double jl_constant = 8.0;
  /// Upper bound on n * (rows per solve block); bounds memory, not results.
  std::size_t max_block_entries = std::size_t{1} << 22;
  /// When the sketch needs at least n solves and the operator holds a dense
  /// factorization, return exact scores instead (they meet any eps).
  bool exact_when_cheaper = true;
};

/// Number of random sign rows: ceil(c_jl * eps^-2 * ln n).
inline std::size_t jl_rows(std::size_t n, double eps, double jl_constant) {
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return static_cast<std::size_t>(std::ceil(jl_constant * logn / (eps * eps)));
}

/// Exact leverage scores from the operator's dense grounded factor.
inline std::vector<double> leverage_from_factor(const Graph& g, const Eigen::LLT<Eigen::MatrixXd>& factor) {
  const Eigen::Index k = factor.matrixLLT().rows();
  // tau_e = w_e ||Z (e_u - e_v)||^2 with Z = inverse of the lower factor;
  // vertex 0 is the ground and has no column.
  const Eigen::MatrixXd z = factor.matrixL().solve(Eigen::MatrixXd::Identity(k, k));
  std::vector<double> out(g.num_edges(), 0.0);
  for (EdgeId id = 0; id < g.num_edges(); ++id) {
    const Edge& e = g.edge(id);
    if (e.is_loop()) continue;
    const auto u = static_cast<Eigen::Index>(e.u) - 1;
    const auto v = static_cast<Eigen::Index>(e.v) - 1;
    if (u < 0) {
      out[id] = e.w * z.col(v).squaredNorm();
    } else if (v < 0) {
      out[id] = e.w * z.col(u).squaredNorm();
    } else {
      out[id] = e.w * (z.col(u) - z.col(v)).squaredNorm();
    }
  }
  return out;
}

/// Johnson-Lindenstrauss leverage estimates for every edge.
///
/// Row i of the sketch is a random sign vector q_i over edges; the estimate is
/// w_e * sum_i (b(e)^T L^+ (W^{1/2} B)^T q_i)^2 / t. Rows are drawn in order
/// from one sign stream, so the estimates do not depend on how rows are
/// batched into solves. Values are clamped to (0, 1+eps].
/// Small graphs take the exact route when `opts.exact_when_cheaper` allows.
inline LeverageEstimates estimate_all_leverage_scores(const Graph& g, const LaplacianOperator& op, double eps, Rng& rng,
                                                      const LeverageSketchOptions& opts = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("estimate_all_leverage_scores: eps must lie in (0, 1)");
  if (op.num_vertices() != g.num_vertices()) throw PreconditionError("operator does not match graph");

  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  const std::size_t m = g.num_edges();
  const std::size_t t = jl_rows(g.num_vertices(), eps, opts.jl_constant);
  const std::size_t block =
      std::clamp<std::size_t>(opts.max_block_entries / std::max<std::size_t>(1, g.num_vertices()), 16, t);

  if (opts.exact_when_cheaper && t >= g.num_vertices() && op.grounded_factor() != nullptr) {
    LeverageEstimates out{leverage_from_factor(g, *op.grounded_factor()), LeverageRegime::kMultiplicative, eps};
    for (double& v : out.values) v = std::clamp(v, 1e-300, 1.0 + eps);
    return out;
  }

  std::vector<double> scale(m);
  for (EdgeId id = 0; id < m; ++id) scale[id] = std::sqrt(g.edge(id).w / static_cast<double>(t));

  std::vector<double> acc(m, 0.0);
  RademacherStream signs(rng);
  for (std::size_t row0 = 0; row0 < t; row0 += block) {
    const auto rows = static_cast<Eigen::Index>(std::min(block, t - row0));
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (EdgeId id = 0; id < m; ++id) {
        const Edge& e = g.edge(id);
        const double s = signs.next() * scale[id];
        if (e.is_loop()) continue;
        y(e.u, r) += s;
        y(e.v, r) -= s;
      }
    }
    const Eigen::MatrixXd zt = op.solve_many(std::move(y)).transpose();
    for (EdgeId id = 0; id < m; ++id) {
      const Edge& e = g.edge(id);
      if (e.is_loop()) continue;
      acc[id] += e.w * (zt.col(e.u) - zt.col(e.v)).squaredNorm();
    }
  }

  LeverageEstimates out{std::move(acc), LeverageRegime::kMultiplicative, eps};
  for (double& v : out.values) v = std::clamp(v, 1e-300, 1.0 + eps);
  return out;
}

inline LeverageEstimates estimate_all_leverage_scores(const Graph& g, double eps, Rng& rng,
                                                      const LeverageSketchOptions& opts = {}) {
  const LaplacianOperator op(g);
  return estimate_all_leverage_scores(g, op, eps, rng, opts);
}

}  // namespace treecount
