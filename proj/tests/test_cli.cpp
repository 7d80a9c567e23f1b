#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "treecount/generators.hpp"

using namespace treecount;

namespace {

namespace fs = std::filesystem;

struct Output {
  int status = 0;
  std::string out;
};

Output run(const std::string& args) {
  const std::string cmd = std::string(TREECOUNT_CLI) + " " + args + " 2>/dev/null";
  Output o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) o.out.append(buf.data(), got);
  o.status = pclose(p);
  return o;
}

fs::path write_graph(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "treecount_cli_test";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(RunReport, JsonRoundTrip) {
  cli::RunReport r;
  r.command = "estimate";
  r.input = "g.el";
  r.n = 3;
  r.m = 3;
  r.config = cli::config_json(EstimatorConfig{});
  r.result = {{"log_count", 1.0986122886681098}, {"count", 3.0}};
  r.elapsed_seconds = 0.25;
  r.trace.push_back(cli::record_json(IterationRecord{}));
  EXPECT_EQ(cli::from_json_text(cli::to_json_text(r)), r);
  r.trace = cli::ordered_json::array();
  EXPECT_EQ(cli::from_json_text(cli::to_json_text(r)), r);
}

TEST(RunReport, CountOmittedBeyondDoubleRange) {
  cli::ordered_json small, large;
  cli::put_log_count(small, 700.0);
  cli::put_log_count(large, 700.5);
  EXPECT_TRUE(small.contains("count"));
  EXPECT_FALSE(large.contains("count"));
  EXPECT_EQ(large["log_count"], 700.5);
}

TEST(RunReport, TextHasSameNumbers) {
  cli::RunReport r;
  r.command = "exact";
  r.input = "k4.el";
  cli::put_log_count(r.result, std::log(16.0));
  const std::string text = cli::to_text(r);
  EXPECT_NE(text.find("log_count: " + cli::ordered_json(std::log(16.0)).dump()), std::string::npos);
  EXPECT_NE(text.find("command: exact"), std::string::npos);
}

TEST(Commands, ExactNamedGraphs) {
  cli::Options opt;
  opt.input = write_graph("k4.el", serialize(gen::complete(4))).string();
  EXPECT_NEAR(cli::cmd_exact(opt).result["log_count"].get<double>(), std::log(16.0), 1e-12);
  opt.input = write_graph("c5.el", serialize(gen::cycle(5))).string();
  EXPECT_NEAR(cli::cmd_exact(opt).result["log_count"].get<double>(), std::log(5.0), 1e-12);
}

TEST(Commands, ExactDisconnected) {
  cli::Options opt;
  opt.input = write_graph("disc.el", "0 1 1\n2 3 1\n").string();
  try {
    cli::cmd_exact(opt);
    FAIL() << "expected an error";
  } catch (const DisconnectedGraphError& e) {
    EXPECT_STREQ(e.what(), "graph is disconnected");
  }
}

TEST(Commands, ExactGuards) {
  cli::Options opt;
  opt.input = write_graph("big.el", serialize(gen::cycle(2500))).string();
  EXPECT_THROW(cli::cmd_exact(opt), PreconditionError);
  opt.confirm_large = true;
  EXPECT_NEAR(cli::cmd_exact(opt).result["log_count"].get<double>(), std::log(2500.0), 1e-9);
  opt.input = write_graph("huge.el", serialize(gen::path(5001))).string();
  EXPECT_THROW(cli::cmd_exact(opt), PreconditionError);
}

TEST(Commands, EstimateTriangle) {
  cli::Options opt;
  opt.input = write_graph("tri.el", "0 1 1\n1 2 1\n2 0 1\n").string();
  opt.config.epsilon = 0.1;
  opt.config.seed = 7;
  const cli::RunReport r = cli::cmd_estimate(opt);
  EXPECT_NEAR(r.result["log_count"].get<double>(), 1.0986, 1e-4);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.m, 3u);
}

TEST(Commands, PhasesFromEdgeCount) {
  cli::Options opt;
  opt.phase_edges = 600;
  EXPECT_EQ(cli::cmd_phases(opt).result["phases"].size(), 1u);
  opt.phase_edges = 300;
  EXPECT_EQ(cli::cmd_phases(opt).result["phases"].size(), 0u);
}

TEST(Commands, VerifyUnknownSuite) {
  cli::Options opt;
  opt.suite = "nonsense";
  EXPECT_THROW(cli::cmd_verify(opt), PreconditionError);
}

TEST(Binary, EstimateTriangleJson) {
  const fs::path tri = write_graph("tri.el", "0 1 1\n1 2 1\n2 0 1\n");
  const Output o = run("estimate " + tri.string() + " --epsilon 0.1 --seed 7");
  ASSERT_EQ(o.status, 0);
  const auto j = cli::ordered_json::parse(o.out);
  EXPECT_NEAR(j["result"]["log_count"].get<double>(), 1.0986, 1e-4);
}

TEST(Binary, RepeatsAndTrace) {
  Rng rng = make_stream(3, 0);
  const fs::path g = write_graph("medium.el", serialize(gen::random_connected_m(60, 340, {1.0, 2.0}, rng)));
  const fs::path trace = fs::temp_directory_path() / "treecount_cli_test" / "trace.jsonl";
  fs::remove(trace);
  const Output o = run("estimate " + g.string() + " --repeats 1 --seed 3 --trace " + trace.string());
  ASSERT_EQ(o.status, 0);
  const auto j = cli::ordered_json::parse(o.out);
  EXPECT_EQ(j["result"]["repeat_values"].size(), 1u);
  std::ifstream in(trace);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto rec = cli::ordered_json::parse(line);
    EXPECT_TRUE(rec.contains("x"));
    EXPECT_TRUE(rec.contains("error_budget"));
    ++lines;
  }
  EXPECT_EQ(lines, j["result"]["iterations"].get<std::size_t>());
  EXPECT_GT(lines, 0u);
}

TEST(Binary, ErrorsExitNonzero) {
  const fs::path bad = write_graph("bad.el", "0 1 -1\n");
  EXPECT_NE(run("estimate " + bad.string()).status, 0);
  EXPECT_NE(run("exact /nonexistent/graph.el").status, 0);
  EXPECT_NE(run("verify nonsense").status, 0);
  const fs::path disc = write_graph("disc.el", "0 1 1\n2 3 1\n");
  EXPECT_NE(run("exact " + disc.string()).status, 0);
}

TEST(Binary, VerifyEliminationPassesAll) {
  const Output o = run("verify elimination --seed 1");
  ASSERT_EQ(o.status, 0);
  const auto j = cli::ordered_json::parse(o.out);
  EXPECT_EQ(j["result"]["passed"], 200);
  EXPECT_EQ(j["result"]["trials"], 200);
}

TEST(Binary, TextFormat) {
  const fs::path tri = write_graph("tri.el", "0 1 1\n1 2 1\n2 0 1\n");
  const Output json = run("exact " + tri.string());
  const Output text = run("exact " + tri.string() + " --format text");
  ASSERT_EQ(text.status, 0);
  const auto j = cli::ordered_json::parse(json.out);
  EXPECT_NE(text.out.find("log_count: " + j["result"]["log_count"].dump()), std::string::npos);
}
