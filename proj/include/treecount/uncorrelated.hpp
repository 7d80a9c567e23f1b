#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "treecount/cauchy_sketch.hpp"
#include "treecount/error.hpp"
#include "treecount/graph.hpp"
#include "treecount/laplacian_solver.hpp"
#include "treecount/leverage.hpp"
#include "treecount/log.hpp"
#include "treecount/random.hpp"

namespace treecount {

/// How C * Mtilde is formed. Both give the same matrix up to solver error:
/// kEdgeSolves forms the 2k x 2k correlation matrix with 2k solves and then
/// applies masks and sketch densely; kSketchSolves pushes each masked sketch
/// through the solver (t solves per mask). kAuto picks the cheaper one.
enum class CorrelationRoute { kAuto, kEdgeSolves, kSketchSolves };

struct UncorrelatedOptions {
  double keep_constant = 16.0;    ///< keep edges with recovered correlation <= c * k * ln(n)^2 / |S|
  double mask_constant = 144.0;   ///< number of masks = ceil(c * ln n)
  double sketch_constant = kDefaultSketchConstant;
  double sketch_eps = 0.1;
  std::size_t retry_cap = 20;
  CorrelationRoute route = CorrelationRoute::kAuto;
};

/// A subset F of edges together with its certified correlation level.
struct EdgeSubset {
  std::vector<EdgeId> ids;
  double rho_bound = 0.0;        ///< keep_constant * k * ln(n)^2 / |S|
  std::size_t source_size = 0;   ///< |S|
  std::size_t attempts = 0;      ///< F+ samples drawn
  std::vector<double> recovered; ///< sketched correlation estimate per chosen edge

  /// Single edges have no cross terms, so they are 0-correlated whatever the bound says.
  double certified_rho() const noexcept { return ids.size() <= 1 ? 0.0 : rho_bound; }
  std::size_t size() const noexcept { return ids.size(); }
};

inline double certified_rho_bound(double keep_constant, std::size_t k, std::size_t n, std::size_t source_size) {
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return keep_constant * static_cast<double>(k) * logn * logn / static_cast<double>(source_size);
}

inline std::size_t mask_count(std::size_t n, double mask_constant) {
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mask_constant * logn)));
}

/// `count` uniform 0/1 masks over `size` positions.
inline std::vector<std::vector<char>> draw_masks(std::size_t size, std::size_t count, Rng& rng) {
  std::vector<std::vector<char>> masks(count, std::vector<char>(size));
  for (auto& h : masks) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < size; ++i) {
      if (i % 64 == 0) bits = rng();
      h[i] = static_cast<char>(bits & 1U);
      bits >>= 1;
    }
  }
  return masks;
}

/// Entry (e, f): fraction of masks with h_e = 1 and h_f = 0, i.e. the weight
/// entry (e, f) of M receives in the averaged estimator, divided by 4.
inline Eigen::MatrixXd mask_inclusion_frequency(const std::vector<std::vector<char>>& masks, std::size_t size) {
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  for (const auto& h : masks) {
    for (std::size_t e = 0; e < size; ++e) {
      for (std::size_t f = 0; f < size; ++f) {
        if (e != f && h[e] && !h[f]) freq(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(f)) += 1.0;
      }
    }
  }
  return masks.empty() ? freq : Eigen::MatrixXd(freq / static_cast<double>(masks.size()));
}

namespace detail {

// Columns sqrt(w_e) b(e) for e in `ids`.
inline Eigen::MatrixXd weighted_incidence_columns(const Graph& g, std::span<const EdgeId> ids) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_vertices()),
                                            static_cast<Eigen::Index>(ids.size()));
  for (std::size_t a = 0; a < ids.size(); ++a) {
    const Edge& e = g.edge(ids[a]);
    add_edge_vector(b.col(static_cast<Eigen::Index>(a)), e, std::sqrt(e.w));
  }
  return b;
}

}  // namespace detail

/// C * Mtilde, where Mtilde = (1/l) sum_i 4 diag(h_i) M diag(1 - h_i) and M is
/// the correlation matrix of `ids`. Result is t x |ids|.
inline Eigen::MatrixXd sketched_masked_correlations(const Graph& g, const LaplacianOperator& op,
                                                    std::span<const EdgeId> ids,
                                                    const std::vector<std::vector<char>>& masks,
                                                    const CauchySketch& sketch, CorrelationRoute route) {
  const auto d = static_cast<Eigen::Index>(ids.size());
  const auto t = static_cast<Eigen::Index>(sketch.rows);
  const double l = static_cast<double>(masks.size());
  const Eigen::MatrixXd bw = detail::weighted_incidence_columns(g, ids);

  if (route == CorrelationRoute::kAuto) {
    route = static_cast<double>(d) <= static_cast<double>(t) * l ? CorrelationRoute::kEdgeSolves
                                                                 : CorrelationRoute::kSketchSolves;
  }

  auto as_vector = [d](const std::vector<char>& h, bool complement) {
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = (h[static_cast<std::size_t>(i)] != 0) != complement ? 1.0 : 0.0;
    return v;
  };

  if (route == CorrelationRoute::kEdgeSolves) {
    const Eigen::MatrixXd m = bw.transpose() * op.solve_many(bw);
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(d, d);
    for (const auto& h : masks) {
      avg += (4.0 / l) * (as_vector(h, false).asDiagonal() * m * as_vector(h, true).asDiagonal());
    }
    return sketch.entries * avg;
  }

  // (D2 B) L^+ (C D1 B)^T for D1 = diag(h) W^{1/2}, D2 = W^{1/2} diag(1 - h); its transpose is C diag(h) M diag(1-h).
  Eigen::MatrixXd acc_t = Eigen::MatrixXd::Zero(d, t);
  for (const auto& h : masks) {
    const Eigen::MatrixXd rhs = bw * as_vector(h, false).asDiagonal() * sketch.entries.transpose();
    const Eigen::MatrixXd u = op.solve_many(rhs);
    acc_t += (4.0 / l) * (as_vector(h, true).asDiagonal() * (bw.transpose() * u));
  }
  return acc_t.transpose();
}

/// Finds k edges of `s` whose mutual correlation is certified at
/// keep_constant * k * ln(n)^2 / |S|, by sampling 2k candidates, estimating
/// each candidate's l1 correlation against the others with masked Cauchy
/// sketches, and keeping the k lowest estimates when at least k fall below the
/// bound. Resamples up to `retry_cap` times.
inline EdgeSubset get_uncorrelated(const Graph& g, const LaplacianOperator& op, std::span<const EdgeId> s, std::size_t k,
                                   Rng& rng, const UncorrelatedOptions& opts = {}) {
  if (k == 0) throw PreconditionError("get_uncorrelated: k must be positive");
  if (2 * k > s.size()) throw PreconditionError("get_uncorrelated: k exceeds |S|/2");
  require_connected(g, "get_uncorrelated");
  {
    std::vector<EdgeId> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw PreconditionError("get_uncorrelated: candidate set has duplicates");
    }
    if (!sorted.empty() && sorted.back() >= g.num_edges()) throw PreconditionError("get_uncorrelated: unknown edge id");
  }

  const std::size_t n = g.num_vertices();
  const double bound = certified_rho_bound(opts.keep_constant, k, n, s.size());
  const double delta = std::min(0.5, 1.0 / std::pow(static_cast<double>(std::max<std::size_t>(n, 2)), 3.0));
  const std::size_t masks_per_try = mask_count(n, opts.mask_constant);

  std::vector<EdgeId> pool(s.begin(), s.end());
  std::size_t best = 0;
  for (std::size_t attempt = 1; attempt <= opts.retry_cap; ++attempt) {
    // Uniform 2k-subset: partial Fisher-Yates over the candidate pool.
    for (std::size_t i = 0; i < 2 * k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    const std::vector<EdgeId> cand(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(2 * k));
    const auto masks = draw_masks(cand.size(), masks_per_try, rng);
    const CauchySketch sketch = build_sketch(cand.size(), delta, opts.sketch_eps, rng, opts.sketch_constant);
    const Eigen::MatrixXd sm = sketched_masked_correlations(g, op, cand, masks, sketch, opts.route);

    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t a = 0; a < cand.size(); ++a) {
      const double r = recover(sm.col(static_cast<Eigen::Index>(a)));
      if (r <= bound) scored.emplace_back(r, a);
    }
    if (log::enabled(log::Level::kDebug)) {
      std::ostringstream msg;
      msg << "get_uncorrelated attempt " << attempt << ": " << scored.size() << "/" << cand.size()
          << " candidates under bound " << bound;
      log::write(log::Level::kDebug, msg.str());
    }
    best = std::max(best, scored.size());
    if (scored.size() < k) continue;

    std::sort(scored.begin(), scored.end());
    EdgeSubset f;
    f.rho_bound = bound;
    f.source_size = s.size();
    f.attempts = attempt;
    for (std::size_t i = 0; i < k; ++i) {
      f.ids.push_back(cand[scored[i].second]);
      f.recovered.push_back(scored[i].first);
    }
    return f;
  }
  throw RetryLimitError(opts.retry_cap, best, k);
}

/// Leverage estimates for every edge of F from a single aggregated solve:
/// est_f = w_f^{1/2} b(f)^T L^+ sum_{e in F} w_e^{1/2} b(e). Off by at most the
/// correlation of f against the rest of F.
inline LeverageEstimates estimate_leverage_in_subset(const Graph& g, const LaplacianOperator& op, const EdgeSubset& f) {
  if (op.num_vertices() != g.num_vertices()) throw PreconditionError("operator does not match graph");
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_vertices()));
  for (EdgeId id : f.ids) {
    const Edge& e = g.edge(id);
    add_edge_vector(agg, e, std::sqrt(e.w));
  }
  const Eigen::VectorXd x = op.solve(agg);
  LeverageEstimates out{{}, LeverageRegime::kAdditive, f.certified_rho()};
  out.values.reserve(f.ids.size());
  for (EdgeId id : f.ids) {
    const Edge& e = g.edge(id);
    out.values.push_back(std::sqrt(e.w) * (x(e.u) - x(e.v)));
  }
  return out;
}

struct WeightedSumEstimate {
  double value = 0.0;
  std::vector<double> theta;
  double variance_bound = 0.0;  ///< 2 rho^2 |F|
};

/// Unbiased estimate of sum_f theta_f tau_f: v^T L^+ v with
/// v = sum_f r_f (w_f theta_f)^{1/2} b(f) and independent random signs r_f.
inline WeightedSumEstimate estimate_weighted_leverage_sum(const Graph& g, const LaplacianOperator& op,
                                                          const EdgeSubset& f, std::span<const double> theta,
                                                          Rng& rng) {
  if (theta.size() != f.ids.size()) throw PreconditionError("estimate_weighted_leverage_sum: theta size mismatch");
  for (double th : theta) {
    if (!(th >= 0.0 && th <= 1.0)) throw PreconditionError("estimate_weighted_leverage_sum: theta outside [0, 1]");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_vertices()));
  RademacherStream signs(rng);
  for (std::size_t a = 0; a < f.ids.size(); ++a) {
    const Edge& e = g.edge(f.ids[a]);
    add_edge_vector(v, e, signs.next() * std::sqrt(e.w * theta[a]));
  }
  WeightedSumEstimate out;
  out.value = v.squaredNorm() == 0.0 ? 0.0 : v.dot(op.solve(v));
  out.theta.assign(theta.begin(), theta.end());
  const double rho = f.certified_rho();
  out.variance_bound = 2.0 * rho * rho * static_cast<double>(f.ids.size());
  return out;
}

}  // namespace treecount
