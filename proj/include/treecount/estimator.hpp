#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "treecount/elimination.hpp"
#include "treecount/error.hpp"
#include "treecount/exact.hpp"
#include "treecount/graph.hpp"
#include "treecount/laplacian_solver.hpp"
#include "treecount/leverage.hpp"
#include "treecount/log.hpp"
#include "treecount/random.hpp"
#include "treecount/uncorrelated.hpp"

namespace treecount {

struct EstimatorConfig {
  double epsilon = 0.1;
  double k_constant = 1.0;           ///< k = ceil(c_k * eps * sqrt(m) / ln(m)^3) before clamping
  double theta_constant = 0.1;       ///< C in theta_f = C / (1 - est_f)
  double leverage_keep_threshold = 0.8;
  double leverage_sketch_eps = 0.1;
  std::size_t base_case_edges = 300; ///< m at or below this is solved exactly
  double rho_cap = 0.01;
  std::size_t median_repeats = 0;    ///< 0: ceil(2 log2 m)
  std::uint64_t seed = 0;
  double budget_constant = 200.0;    ///< per-iteration bias/variance charge is c * |F| * rho^2
  double time_budget_seconds = 0.0;  ///< 0: unlimited
  /// With k = 1, take a uniform edge of S directly: a single edge has no
  /// off-diagonal correlation to certify, so the sketch search is skipped.
  bool singleton_shortcut = true;
  LeverageSketchOptions leverage;
  UncorrelatedOptions uncorrelated;
  SolverOptions solver;
};

struct IterationRecord {
  std::size_t index = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t s_size = 0;
  std::size_t k = 0;
  double rho = 0.0;
  std::size_t attempts = 0;
  double x = 0.0;
  double phi = 0.0;
  double delta = 0.0;  ///< cumulative elimination correction so far
  double error_budget = 0.0;
  double variance_budget = 0.0;
};

/// Running estimate of log T with its accumulated budgets.
struct LogEstimate {
  double value = 0.0;
  double error_budget = 0.0;
  double variance_budget = 0.0;
  double elimination_delta = 0.0;
  double base_case_log = 0.0;
  std::size_t base_case_edges = 0;
  std::size_t iterations = 0;
  std::size_t repeat = 0;            ///< which amplification run this is
  std::vector<double> repeat_values; ///< every run's value, in run order
  std::vector<IterationRecord> trace;
};

struct IterationEstimate {
  double x = 0.0;
  double phi = 0.0;
  std::vector<double> theta;
};

/// One deletion step's estimate of log T(G \ F) - log T(G):
/// X = -phi + sum_f [log(1 - est_f) + est_f / (1 - est_f)], with theta_f =
/// C / (1 - est_f) and phi the weighted leverage sum estimate divided by C.
inline IterationEstimate iteration_estimate(const Graph& g, const LaplacianOperator& op, const EdgeSubset& f,
                                            const LeverageEstimates& tau, Rng& rng, double theta_constant = 0.1,
                                            double rho_cap = 0.01) {
  if (tau.values.size() != f.ids.size()) throw PreconditionError("iteration_estimate: estimate count mismatch");
  if (f.certified_rho() > rho_cap) {
    throw PreconditionError("iteration_estimate: subset correlation bound " + std::to_string(f.certified_rho()) +
                            " exceeds rho cap " + std::to_string(rho_cap));
  }
  IterationEstimate out;
  double taylor = 0.0;
  out.theta.reserve(f.ids.size());
  for (double est : tau.values) {
    if (est >= 0.9) throw PreconditionError("iteration_estimate: leverage estimate " + std::to_string(est) + " >= 0.9");
    out.theta.push_back(theta_constant / (1.0 - est));
    taylor += std::log1p(-est) + est / (1.0 - est);
  }
  const WeightedSumEstimate ws = estimate_weighted_leverage_sum(g, op, f, out.theta, rng);
  out.phi = ws.value / theta_constant;
  out.x = -out.phi + taylor;
  return out;
}

namespace detail {

inline double safe_log(double x) { return std::max(1.0, std::log(std::max(x, 1.0))); }

inline std::size_t formula_k(std::size_t m, const EstimatorConfig& cfg) {
  const double lm = safe_log(static_cast<double>(m));
  return static_cast<std::size_t>(
      std::ceil(cfg.k_constant * cfg.epsilon * std::sqrt(static_cast<double>(m)) / (lm * lm * lm)));
}

inline std::size_t rho_capped_k(std::size_t n, std::size_t s_size, const EstimatorConfig& cfg) {
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return static_cast<std::size_t>(
      std::floor(cfg.rho_cap * static_cast<double>(s_size) / (cfg.uncorrelated.keep_constant * logn * logn)));
}

}  // namespace detail

/// Subset size for one iteration: the asymptotic choice, clamped to |S|/2 and
/// to the largest k whose certified rho stays under rho_cap, but at least 1.
inline std::size_t choose_k(std::size_t m, std::size_t n, std::size_t s_size, const EstimatorConfig& cfg) {
  const std::size_t k = std::min({detail::formula_k(m, cfg), s_size / 2, detail::rho_capped_k(n, s_size, cfg)});
  return std::max<std::size_t>(k, 1);
}

/// Default X: the estimate itself. Tests substitute exact values here.
struct UseEstimate {
  double operator()(const Graph&, const EdgeSubset&, const IterationEstimate& est) const { return est.x; }
};

inline void validate_config(const EstimatorConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
  if (!(cfg.leverage_sketch_eps > 0.0 && cfg.leverage_sketch_eps < 1.0)) {
    throw PreconditionError("leverage sketch eps must lie in (0, 1)");
  }
  if (!(cfg.theta_constant > 0.0) || !(cfg.rho_cap >= 0.0) || !(cfg.k_constant > 0.0)) {
    throw PreconditionError("estimator constants must be positive");
  }
}

/// Recursive deletion estimator for log T(G), run as a loop:
///   eliminate degree <= 2 vertices (exact, accumulates delta);
///   if few edges remain, finish with the exact determinant;
///   otherwise sketch leverage scores, take S = {est <= 0.8}, pick an
///   uncorrelated F from S, estimate X ~ log T(G\F) - log T(G), delete F.
/// The result is sum(delta) + log T(base) - sum(X).
template <class XPolicy = UseEstimate>
LogEstimate approx_spanning_tree(const Graph& input, const EstimatorConfig& cfg, Rng& rng, XPolicy&& policy = {}) {
  validate_config(cfg);
  require_connected(input, "approx_spanning_tree");
  require_weight_range(input);
  if (input.num_vertices() == 0) throw PreconditionError("approx_spanning_tree: empty graph");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  LogEstimate out;
  Graph g = input;
  double x_sum = 0.0;
  for (std::size_t iter = 0;; ++iter) {
    EliminationResult elim = eliminate_low_degree(g);
    out.elimination_delta += elim.delta;
    g = std::move(elim.reduced);

    const std::size_t m = g.num_edges();
    if (m <= cfg.base_case_edges || g.num_vertices() <= 1) break;

    const LaplacianOperator op(g, cfg.solver);
    const LeverageEstimates lev = estimate_all_leverage_scores(g, op, cfg.leverage_sketch_eps, rng, cfg.leverage);
    std::vector<EdgeId> s;
    for (EdgeId id = 0; id < m; ++id) {
      if (lev.values[id] <= cfg.leverage_keep_threshold) s.push_back(id);
    }
    if (21 * s.size() < m) {
      throw Error("leverage filter kept " + std::to_string(s.size()) + " of " + std::to_string(m) +
                  " edges, below m/21");
    }
    if (s.size() < 2) break;

    const std::size_t k = choose_k(m, g.num_vertices(), s.size(), cfg);
    EdgeSubset f;
    if (k == 1 && cfg.singleton_shortcut) {
      f.ids = {s[std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng)]};
      f.rho_bound = certified_rho_bound(cfg.uncorrelated.keep_constant, 1, g.num_vertices(), s.size());
      f.source_size = s.size();
      f.attempts = 1;
    } else {
      f = get_uncorrelated(g, op, s, k, rng, cfg.uncorrelated);
    }
    const LeverageEstimates tau = estimate_leverage_in_subset(g, op, f);
    const IterationEstimate est = iteration_estimate(g, op, f, tau, rng, cfg.theta_constant, cfg.rho_cap);
    const double x = policy(std::as_const(g), f, est);
    x_sum += x;

    const double rho = f.certified_rho();
    const double charge = cfg.budget_constant * static_cast<double>(f.size()) * rho * rho;
    out.error_budget += charge;
    out.variance_budget += charge;

    IterationRecord rec;
    rec.index = iter;
    rec.m = m;
    rec.n = g.num_vertices();
    rec.s_size = s.size();
    rec.k = f.size();
    rec.rho = rho;
    rec.attempts = f.attempts;
    rec.x = x;
    rec.phi = est.phi;
    rec.delta = out.elimination_delta;
    rec.error_budget = out.error_budget;
    rec.variance_budget = out.variance_budget;
    out.trace.push_back(rec);
    ++out.iterations;

    if (log::enabled(log::Level::kInfo)) {
      std::ostringstream msg;
      msg << "iteration " << iter << ": m=" << m << " n=" << g.num_vertices() << " |S|=" << s.size() << " k=" << k
          << " X=" << x;
      log::write(log::Level::kInfo, msg.str());
    }

    g = remove_edges(g, f.ids);
    if (!validate_connected(g)) throw Error("deleting an uncorrelated subset disconnected the graph");

    if (cfg.time_budget_seconds > 0.0) {
      const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      if (elapsed > cfg.time_budget_seconds) throw BudgetExceededError(cfg.time_budget_seconds, out.iterations, g.num_edges());
    }
  }

  out.base_case_edges = g.num_edges();
  out.base_case_log = exact_log_tree_count(g);
  out.value = out.elimination_delta + out.base_case_log - x_sum;
  out.repeat_values = {out.value};
  return out;
}

inline std::size_t default_repeats(std::size_t m) {
  if (m <= 1) return 1;
  return static_cast<std::size_t>(std::ceil(2.0 * std::log2(static_cast<double>(m))));
}

/// Median of independent runs; run r uses substream r of cfg.seed. For an
/// even number of runs the lower median is returned.
inline LogEstimate estimate_with_amplification(const Graph& g, const EstimatorConfig& cfg) {
  const std::size_t repeats = cfg.median_repeats ? cfg.median_repeats : default_repeats(g.num_edges());
  std::vector<LogEstimate> runs;
  runs.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    Rng rng = make_stream(cfg.seed, r);
    runs.push_back(approx_spanning_tree(g, cfg, rng));
    runs.back().repeat = r;
  }
  std::vector<std::size_t> order(repeats);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].value < runs[b].value; });
  std::vector<double> values;
  for (const LogEstimate& run : runs) values.push_back(run.value);
  LogEstimate chosen = std::move(runs[order[(repeats - 1) / 2]]);
  chosen.repeat_values = std::move(values);
  return chosen;
}

struct Phase {
  std::size_t index = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  double rho = 0.0;     ///< predicted certified rho (0 for single-edge subsets)
  double budget = 0.0;  ///< predicted bias (= variance) charge of the phase
  std::size_t max_iterations = 0;
};

/// Phase i covers graphs with at most m0 / 2^i edges; lists phases until the
/// base case. Uses m as a stand-in for |S| and n when predicting k and rho.
inline std::vector<Phase> phase_schedule(std::size_t m0, const EstimatorConfig& cfg) {
  std::vector<Phase> out;
  for (std::size_t i = 0;; ++i) {
    const std::size_t mi = i >= 63 ? 0 : m0 >> i;
    if (mi <= cfg.base_case_edges || mi == 0) break;
    Phase p;
    p.index = i;
    p.m = mi;
    p.k = choose_k(mi, mi, mi, cfg);
    p.rho = p.k <= 1 ? 0.0 : certified_rho_bound(cfg.uncorrelated.keep_constant, p.k, mi, mi);
    p.max_iterations = (mi - mi / 2 + p.k - 1) / p.k;
    p.budget = cfg.budget_constant * static_cast<double>(p.max_iterations * p.k) * p.rho * p.rho;
    out.push_back(p);
  }
  return out;
}

}  // namespace treecount
