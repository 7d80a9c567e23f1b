#pragma once

// RunReport: the single output record of every CLI command, with JSON and
// text renderings.

#include <cmath>
#include <sstream>
#include <string>

#include <json.hpp>

#include "treecount/estimator.hpp"
#include "treecount/verify.hpp"

namespace treecount::cli {

using nlohmann::ordered_json;

struct RunReport {
  std::string command;
  std::string input;
  std::size_t n = 0;
  std::size_t m = 0;
  ordered_json config = ordered_json::object();
  ordered_json result = ordered_json::object();
  double elapsed_seconds = 0.0;
  ordered_json trace = ordered_json::array();

  bool operator==(const RunReport&) const = default;
};

inline void to_json(ordered_json& j, const RunReport& r) {
  j = ordered_json{{"command", r.command}, {"input", r.input},   {"n", r.n},
                   {"m", r.m},             {"config", r.config}, {"result", r.result},
                   {"elapsed_seconds", r.elapsed_seconds}};
  if (!r.trace.empty()) j["trace"] = r.trace;
}

inline void from_json(const ordered_json& j, RunReport& r) {
  j.at("command").get_to(r.command);
  j.at("input").get_to(r.input);
  j.at("n").get_to(r.n);
  j.at("m").get_to(r.m);
  r.config = j.at("config");
  r.result = j.at("result");
  j.at("elapsed_seconds").get_to(r.elapsed_seconds);
  r.trace = j.contains("trace") ? j.at("trace") : ordered_json::array();
}

inline std::string to_json_text(const RunReport& r) { return ordered_json(r).dump(2) + "\n"; }

inline RunReport from_json_text(const std::string& text) { return ordered_json::parse(text).get<RunReport>(); }

inline ordered_json config_json(const EstimatorConfig& c) {
  return {{"epsilon", c.epsilon},
          {"seed", c.seed},
          {"repeats", c.median_repeats},
          {"k_constant", c.k_constant},
          {"theta_constant", c.theta_constant},
          {"leverage_keep_threshold", c.leverage_keep_threshold},
          {"leverage_sketch_eps", c.leverage_sketch_eps},
          {"jl_constant", c.leverage.jl_constant},
          {"base_case_edges", c.base_case_edges},
          {"rho_cap", c.rho_cap},
          {"budget_constant", c.budget_constant},
          {"keep_constant", c.uncorrelated.keep_constant},
          {"mask_constant", c.uncorrelated.mask_constant},
          {"sketch_constant", c.uncorrelated.sketch_constant},
          {"sketch_eps", c.uncorrelated.sketch_eps},
          {"retry_cap", c.uncorrelated.retry_cap},
          {"solver_tolerance", c.solver.tolerance}};
}

inline ordered_json record_json(const IterationRecord& r) {
  return {{"iteration", r.index}, {"m", r.m},
          {"n", r.n},             {"s_size", r.s_size},
          {"k", r.k},             {"rho", r.rho},
          {"attempts", r.attempts}, {"x", r.x},
          {"phi", r.phi},         {"delta", r.delta},
          {"error_budget", r.error_budget}, {"variance_budget", r.variance_budget}};
}

/// Adds the natural-scale count only while it fits comfortably in a double.
inline void put_log_count(ordered_json& result, double log_count) {
  result["log_count"] = log_count;
  if (log_count <= 700.0) result["count"] = std::exp(log_count);
}

inline ordered_json estimate_json(const LogEstimate& e) {
  ordered_json out = ordered_json::object();
  put_log_count(out, e.value);
  out["error_budget"] = e.error_budget;
  out["variance_budget"] = e.variance_budget;
  out["iterations"] = e.iterations;
  out["elimination_delta"] = e.elimination_delta;
  out["base_case_edges"] = e.base_case_edges;
  out["base_case_log"] = e.base_case_log;
  out["chosen_repeat"] = e.repeat;
  out["repeat_values"] = e.repeat_values;
  return out;
}

inline ordered_json suite_json(const verify::SuiteReport& s) {
  ordered_json out{{"suite", s.suite},   {"seed", s.seed},         {"trials", s.trials},
                   {"passed", s.passed}, {"required", s.required}, {"ok", s.ok()}};
  out["worst_margin"] = std::isfinite(s.worst_margin) ? ordered_json(s.worst_margin) : ordered_json(nullptr);
  ordered_json fails = ordered_json::array();
  for (const auto& f : s.failures) fails.push_back({{"trial", f.trial}, {"detail", f.detail}, {"graph", f.graph}});
  out["failures"] = fails;
  return out;
}

inline void text_value(std::ostream& os, const std::string& key, const ordered_json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object()) {
    os << pad << key << ":\n";
    for (auto it = v.begin(); it != v.end(); ++it) text_value(os, it.key(), it.value(), indent + 2);
  } else if (v.is_array() && !v.empty() && v.front().is_structured()) {
    os << pad << key << ":\n";
    for (std::size_t i = 0; i < v.size(); ++i) text_value(os, "[" + std::to_string(i) + "]", v[i], indent + 2);
  } else if (v.is_string()) {
    os << pad << key << ": " << v.get<std::string>() << "\n";
  } else {
    os << pad << key << ": " << v.dump() << "\n";
  }
}

/// Human-readable form: one "key: value" line per JSON leaf, same numbers.
inline std::string to_text(const RunReport& r) {
  std::ostringstream os;
  const ordered_json j = r;
  for (auto it = j.begin(); it != j.end(); ++it) text_value(os, it.key(), it.value(), 0);
  return os.str();
}

}  // namespace treecount::cli
