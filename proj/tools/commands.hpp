#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <string>

#include "report.hpp"
#include "treecount/exact.hpp"
#include "treecount/graph_io.hpp"

namespace treecount::cli {

inline constexpr std::size_t kExactHardLimit = 5000;
inline constexpr std::size_t kExactConfirmLimit = 2000;

struct Options {
  std::string input;
  EstimatorConfig config;
  std::optional<std::string> trace_path;
  bool confirm_large = false;
  std::string suite;
  std::size_t trials = 0;
  std::size_t phase_edges = 0;  ///< phases without an input file
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline RunReport loaded(const std::string& command, const Options& opt, Graph& g) {
  g = load_graph_file(opt.input);
  RunReport r;
  r.command = command;
  r.input = opt.input;
  r.n = g.num_vertices();
  r.m = g.num_edges();
  return r;
}

}  // namespace detail

inline RunReport cmd_estimate(const Options& opt) {
  const detail::Stopwatch clock;
  Graph g(0, {});
  RunReport r = detail::loaded("estimate", opt, g);
  r.config = config_json(opt.config);
  const LogEstimate est = estimate_with_amplification(g, opt.config);
  r.result = estimate_json(est);
  if (opt.trace_path) {
    std::ofstream out(*opt.trace_path);
    if (!out) throw Error("cannot write trace file '" + *opt.trace_path + "'");
    for (const IterationRecord& rec : est.trace) out << record_json(rec).dump() << "\n";
  }
  r.elapsed_seconds = clock.seconds();
  return r;
}

inline RunReport cmd_exact(const Options& opt) {
  const detail::Stopwatch clock;
  Graph g(0, {});
  RunReport r = detail::loaded("exact", opt, g);
  r.config = {{"confirm_large", opt.confirm_large}};
  if (g.num_vertices() > kExactHardLimit) {
    throw PreconditionError("exact: n = " + std::to_string(g.num_vertices()) + " exceeds the limit of " +
                            std::to_string(kExactHardLimit));
  }
  if (g.num_vertices() > kExactConfirmLimit && !opt.confirm_large) {
    throw PreconditionError("exact: n = " + std::to_string(g.num_vertices()) + " exceeds " +
                            std::to_string(kExactConfirmLimit) + "; pass --confirm-large to run anyway");
  }
  if (!validate_connected(g)) throw DisconnectedGraphError();
  put_log_count(r.result, exact_log_tree_count(g));
  r.elapsed_seconds = clock.seconds();
  return r;
}

inline RunReport cmd_verify(const Options& opt) {
  const detail::Stopwatch clock;
  RunReport r;
  r.command = "verify";
  r.config = {{"suite", opt.suite}, {"seed", opt.config.seed}, {"trials", opt.trials}};
  r.result = suite_json(verify::run_suite(opt.suite, opt.config.seed, opt.trials));
  r.elapsed_seconds = clock.seconds();
  return r;
}

inline RunReport cmd_phases(const Options& opt) {
  const detail::Stopwatch clock;
  RunReport r;
  r.command = "phases";
  std::size_t m0 = opt.phase_edges;
  if (!opt.input.empty()) {
    Graph g(0, {});
    r = detail::loaded("phases", opt, g);
    m0 = g.num_edges();
  }
  r.config = config_json(opt.config);
  ordered_json phases = ordered_json::array();
  double total = 0.0;
  for (const Phase& p : phase_schedule(m0, opt.config)) {
    total += p.budget;
    phases.push_back({{"phase", p.index},
                      {"m", p.m},
                      {"k", p.k},
                      {"rho", p.rho},
                      {"max_iterations", p.max_iterations},
                      {"budget", p.budget}});
  }
  r.result = {{"m0", m0}, {"phases", phases}, {"total_budget", total}};
  r.elapsed_seconds = clock.seconds();
  return r;
}

}  // namespace treecount::cli
