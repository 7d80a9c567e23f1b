// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all of
// them. Each prints one line: "criterion N: PASS|FAIL <detail>".

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treecount/treecount.hpp"

using namespace treecount;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string str(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

const std::vector<double> kWeights = {0.5, 1.0, 2.0};

Graph small_graph(Rng& rng, std::size_t min_n, std::size_t max_n) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(min_n, max_n)(rng);
  const double p = 0.2 + 0.7 * uniform01(rng);
  return gen::random_connected(n, p, kWeights, rng);
}

// A small graph together with a nonempty edge set F of leverage <= 0.88 whose
// removal keeps the graph connected.
struct GraphWithSubset {
  Graph g;
  std::vector<EdgeId> f;
};

GraphWithSubset small_graph_with_subset(Rng& rng, std::size_t max_f) {
  for (;;) {
    Graph g = small_graph(rng, 4, 9);
    const std::vector<double> tau = exact_leverage_scores(g);
    std::vector<EdgeId> low;
    for (EdgeId id = 0; id < g.num_edges(); ++id) {
      if (tau[id] <= 0.88) low.push_back(id);
    }
    for (int tries = 0; tries < 8 && !low.empty(); ++tries) {
      std::shuffle(low.begin(), low.end(), rng);
      const std::size_t size = std::uniform_int_distribution<std::size_t>(1, std::min(max_f, low.size()))(rng);
      std::vector<EdgeId> f(low.begin(), low.begin() + static_cast<std::ptrdiff_t>(size));
      if (validate_connected(remove_edges(g, f))) return {std::move(g), std::move(f)};
    }
  }
}

// 1. exp(exact) vs contraction-deletion, plus named values.
Outcome oracle_agreement() {
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    Rng rng = make_stream(101, i);
    const Graph g = small_graph(rng, 2, 9);
    const double brute = brute_force_tree_weight(g);
    const double rel = std::abs(std::exp(exact_log_tree_count(g)) - brute) / brute;
    worst = std::max(worst, rel);
    if (rel > 1e-8) ++bad;
  }
  const double tri = std::exp(exact_log_tree_count(gen::triangle()));
  const double k4 = std::exp(exact_log_tree_count(gen::complete(4)));
  const double c5 = std::exp(exact_log_tree_count(gen::cycle(5)));
  const bool named = std::abs(tri - 3.0) <= 1e-9 && std::abs(k4 - 16.0) <= 1e-9 && std::abs(c5 - 5.0) <= 1e-9;
  return {bad == 0 && named, "500 graphs, " + std::to_string(bad) + " over 1e-8 (worst " + str(worst, 3) +
                                 "); triangle " + str(tri, 12) + " K4 " + str(k4, 12) + " C5 " + str(c5, 12)};
}

// 2. delta + log T(reduced) = log T(G).
Outcome elimination_exactness() {
  const verify::SuiteReport rep = verify::elimination(102, 200);
  return {rep.passed == rep.trials && rep.trials == 200,
          std::to_string(rep.passed) + "/" + std::to_string(rep.trials) + " within 1e-9"};
}

// 3. log det(I - M_F) = log T(G \ F) - log T(G).
Outcome determinant_expansion() {
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    Rng rng = make_stream(103, i);
    const GraphWithSubset c = small_graph_with_subset(rng, 5);
    const Eigen::MatrixXd m = exact_correlations(c.g, c.f).values;
    const auto k = m.rows();
    const double lhs = log_det_positive(Eigen::MatrixXd::Identity(k, k) - m);
    const double rhs = exact_log_tree_count(remove_edges(c.g, c.f)) - exact_log_tree_count(c.g);
    worst = std::max(worst, std::abs(lhs - rhs));
    if (std::abs(lhs - rhs) > 1e-8) ++bad;
  }
  return {bad == 0, "200 subsets, " + std::to_string(bad) + " over 1e-8 (worst " + str(worst, 3) + ")"};
}

// 4. |tau_est - tau| <= rho_exact + 1e-6 for the single-solve in-subset estimate.
Outcome in_subset_leverage() {
  std::size_t bad = 0;
  double worst_slack = INFINITY;
  for (std::size_t i = 0; i < 200; ++i) {
    Rng rng = make_stream(104, i);
    const GraphWithSubset c = small_graph_with_subset(rng, 5);
    const CorrelationMatrix corr = exact_correlations(c.g, c.f);
    const double rho = rho_of(corr);
    const LaplacianOperator op(c.g);
    EdgeSubset f;
    f.ids = c.f;
    f.rho_bound = rho;
    const LeverageEstimates est = estimate_leverage_in_subset(c.g, op, f);
    for (std::size_t a = 0; a < c.f.size(); ++a) {
      const double err = std::abs(est.values[a] - corr.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)));
      worst_slack = std::min(worst_slack, rho + 1e-6 - err);
      if (err > rho + 1e-6) ++bad;
    }
  }
  return {bad == 0, "200 subsets, " + std::to_string(bad) + " violations (min slack " + str(worst_slack, 3) + ")"};
}

// 5. Rademacher estimator: exact on single edges; mean and variance on two
// edges of the unit triangle.
Outcome rademacher_statistics() {
  std::size_t single_bad = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    Rng rng = make_stream(105, i);
    const GraphWithSubset c = small_graph_with_subset(rng, 1);
    const double tau = exact_leverage_scores(c.g)[c.f.front()];
    const LaplacianOperator op(c.g);
    EdgeSubset f;
    f.ids = {c.f.front()};
    const double theta = uniform01(rng);
    const WeightedSumEstimate ws = estimate_weighted_leverage_sum(c.g, op, f, std::span<const double>(&theta, 1), rng);
    if (std::abs(ws.value - theta * tau) > 1e-9) ++single_bad;
  }

  const Graph tri = gen::triangle();
  const LaplacianOperator op(tri);
  EdgeSubset f;
  f.ids = {0, 1};
  f.rho_bound = 1.0 / 3.0;
  const std::array<double, 2> theta = {1.0, 1.0};
  const std::size_t draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  Rng rng = make_stream(105, 1000);
  for (std::size_t d = 0; d < draws; ++d) {
    const double v = estimate_weighted_leverage_sum(tri, op, f, theta, rng).value;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(draws);
  const double var = std::max(0.0, sum_sq / static_cast<double>(draws) - mean * mean);
  const double rho = 1.0 / 3.0;
  const double var_bound = 2.0 * rho * rho * 2.0;
  const double sigma = std::sqrt(var_bound / static_cast<double>(draws));
  const bool mean_ok = std::abs(mean - 4.0 / 3.0) <= 3.0 * sigma;
  const bool var_ok = var <= var_bound + 1e-12;
  return {single_bad == 0 && mean_ok && var_ok,
          "single-edge misses " + std::to_string(single_bad) + "/200; triangle mean " + str(mean, 8) + " (4/3 +- " +
              str(3.0 * sigma, 3) + "), variance " + str(var, 6) + " <= " + str(var_bound, 6)};
}

// 6. k = 2 subsets: exact rho within the certified bound in >= 95% of runs.
Outcome subset_certification() {
  const UncorrelatedOptions opts;
  std::size_t within = 0, capped = 0, max_attempts = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    Rng rng = make_stream(106, i);
    Graph g;
    std::vector<EdgeId> s;
    do {
      g = small_graph(rng, 5, 9);
      const LeverageEstimates lev = estimate_all_leverage_scores(g, 0.1, rng);
      s.clear();
      for (EdgeId id = 0; id < g.num_edges(); ++id) {
        if (lev.values[id] <= 0.8) s.push_back(id);
      }
    } while (s.size() < 4);
    try {
      const LaplacianOperator op(g);
      const EdgeSubset f = get_uncorrelated(g, op, s, 2, rng, opts);
      max_attempts = std::max(max_attempts, f.attempts);
      if (rho_of(exact_correlations(g, f.ids)) <= f.rho_bound) ++within;
    } catch (const RetryLimitError&) {
      ++capped;
    }
  }
  return {within >= 190 && capped == 0 && max_attempts <= opts.retry_cap,
          std::to_string(within) + "/200 within bound (need 190), " + std::to_string(capped) +
              " hit the retry cap, max attempts " + std::to_string(max_attempts)};
}

// 7. recover(C v) within (1 +- 0.1) ||v||_1 at failure rate <= 2 delta.
Outcome cauchy_calibration() {
  const double delta = 0.01, eps = 0.1;
  Rng vrng = make_stream(107, 0);
  Eigen::VectorXd random_v(100);
  for (Eigen::Index i = 0; i < 100; ++i) random_v(i) = uniform01(vrng) * 2.0 - 1.0;
  Eigen::VectorXd three_four(2);
  three_four << 3.0, 4.0;
  const std::vector<std::pair<std::string, Eigen::VectorXd>> cases = {
      {"basis", Eigen::VectorXd::Unit(5, 2)}, {"(3,4)", three_four}, {"random d=100", random_v}};
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Eigen::VectorXd& v = cases[c].second;
    const double l1 = v.lpNorm<1>();
    std::size_t fails = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Rng rng = make_stream(seed, 107 + c);
      const CauchySketch sk = build_sketch(static_cast<std::size_t>(v.size()), delta, eps, rng);
      const double r = recover(sk.apply(v), sk);
      if (r < (1.0 - eps) * l1 || r > (1.0 + eps) * l1) ++fails;
    }
    ok = ok && static_cast<double>(fails) <= 2.0 * delta * 1000.0;
    detail += (c ? ", " : "") + cases[c].first + " " + std::to_string(fails) + "/1000";
  }
  return {ok, "failures " + detail + " (limit " + str(2.0 * delta * 1000.0) + ")"};
}

// 8. End-to-end accuracy with one run and with the median of nine.
Outcome end_to_end() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{{50, 150}, {200, 800}}) {
    std::size_t single = 0, median = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      Rng rng = make_stream(108 + n, i);
      const Graph g = gen::random_connected_m(n, m, kWeights, rng);
      const double exact = exact_log_tree_count(g);
      EstimatorConfig cfg;
      cfg.epsilon = 0.2;
      cfg.median_repeats = 9;
      cfg.seed = derive_seed(108 + n, i);
      // Run 0 of the amplified estimate uses the same stream a single run would.
      const LogEstimate est = estimate_with_amplification(g, cfg);
      if (std::abs(est.repeat_values.front() - exact) <= 0.2) ++single;
      if (std::abs(est.value - exact) <= 0.2) ++median;
    }
    ok = ok && single >= 90 && median >= 98;
    detail += "n=" + std::to_string(n) + " m=" + std::to_string(m) + ": single " + std::to_string(single) +
              "/100, median-of-9 " + std::to_string(median) + "/100; ";
    std::cerr << "  " << detail << "elapsed " << str(seconds_since(t0), 4) << " s\n";
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 15.0 * 60.0;
  return {ok, detail + "total " + str(elapsed, 4) + " s (limit 900)"};
}

// 9. Median wall time over 5 runs at eps = 0.5 on random 4-regular graphs with
// m = 5e4 and 1e5; ratio <= 4, total < 30 min. Each run gets a share of the
// 30 minutes; a run that overshoots it aborts the criterion.
Outcome scaling() {
  const double per_run_budget = 30.0 * 60.0 / 10.0;
  std::vector<double> medians;
  for (std::size_t m : {std::size_t{50000}, std::size_t{100000}}) {
    Rng grng = make_stream(109, m);
    const Graph g = gen::random_regular_switched(m / 2, 4, grng);
    std::vector<double> times;
    for (std::uint64_t r = 0; r < 5; ++r) {
      EstimatorConfig cfg;
      cfg.epsilon = 0.5;
      cfg.median_repeats = 1;
      cfg.seed = derive_seed(109, r);
      cfg.time_budget_seconds = per_run_budget;
      const auto t0 = Clock::now();
      try {
        estimate_with_amplification(g, cfg);
      } catch (const BudgetExceededError& e) {
        const double done = static_cast<double>(m - e.edges_left());
        const double rate = static_cast<double>(e.iterations()) / seconds_since(t0);
        return {false, "m=" + std::to_string(m) + " run " + std::to_string(r) + ": " + e.what() + "; " +
                           str(done, 6) + " edges removed at " + str(rate, 3) +
                           " iterations/s, roughly " + str(static_cast<double>(m) / 2.0 / rate / 3600.0, 3) +
                           " h needed to reach the base case"};
      }
      times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    medians.push_back(times[2]);
  }
  const double ratio = medians[1] / medians[0];
  return {ratio <= 4.0, "median " + str(medians[0], 4) + " s -> " + str(medians[1], 4) + " s, ratio " + str(ratio, 4)};
}

// 10. Two consecutive CLI runs per subcommand give identical output apart
// from the elapsed-time field.
std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(TREECOUNT_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return "<popen failed>";
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  out += "\n<status " + std::to_string(pclose(p)) + ">";
  return out;
}

std::string without_elapsed(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("elapsed_seconds") == std::string::npos) out += line + "\n";
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "treecount_acceptance";
  fs::create_directories(dir);
  Rng rng = make_stream(110, 0);
  const fs::path graph = dir / "medium.el";
  std::ofstream(graph) << serialize(gen::random_connected_m(120, 600, kWeights, rng));
  const fs::path trace = dir / "trace.jsonl";
  const std::string g = graph.string();

  const std::vector<std::string> commands = {
      "estimate " + g + " --seed 5 --repeats 3 --trace " + trace.string(),
      "estimate " + g + " --seed 5 --repeats 1 --format text",
      "exact " + g,
      "exact " + g + " --format text",
      "verify elimination --seed 3",
      "verify subset --seed 3 --trials 50",
      "verify estimators --seed 3 --trials 50",
      "verify localization --seed 3 --trials 50",
      "verify end2end --seed 3 --trials 5",
      "phases " + g,
      "phases --edges 100000",
  };
  std::size_t same = 0;
  std::string differing;
  for (const std::string& c : commands) {
    fs::remove(trace);
    const std::string a = without_elapsed(run_cli(c));
    const std::string ta = read_file(trace);
    fs::remove(trace);
    const std::string b = without_elapsed(run_cli(c));
    const std::string tb = read_file(trace);
    if (a == b && ta == tb && a.find("<status 0>") != std::string::npos) {
      ++same;
    } else {
      differing += " [" + c + "]";
    }
  }
  return {same == commands.size(), std::to_string(same) + "/" + std::to_string(commands.size()) +
                                       " command lines reproduce byte for byte" +
                                       (differing.empty() ? "" : "; differing:" + differing)};
}

struct Criterion {
  int id;
  double limit_seconds;  ///< 0: no separate limit
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, 10.0, oracle_agreement},       {2, 5.0, elimination_exactness}, {3, 10.0, determinant_expansion},
      {4, 10.0, in_subset_leverage},     {5, 30.0, rademacher_statistics}, {6, 60.0, subset_certification},
      {7, 30.0, cauchy_calibration},     {8, 900.0, end_to_end},         {9, 1800.0, scaling},
      {10, 0.0, determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  bool all_pass = true;
  for (const Criterion& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    if (c.limit_seconds > 0.0 && elapsed > c.limit_seconds) {
      out.pass = false;
      out.detail += "; runtime " + str(elapsed, 4) + " s over the " + str(c.limit_seconds) + " s limit";
    }
    std::cout << "criterion " << c.id << ": " << (out.pass ? "PASS" : "FAIL") << " " << out.detail << " ["
              << str(elapsed, 4) << " s]" << std::endl;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
