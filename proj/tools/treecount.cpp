// treecount: spanning-tree weight estimation from the command line.
//
//   treecount estimate graph.el --epsilon 0.1 --seed 7
//   treecount exact graph.el
//   treecount verify elimination --seed 1
//   treecount phases graph.el

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace treecount;

struct Shared {
  std::string format = "json";
};

void add_config_flags(CLI::App* sub, cli::Options& opt) {
  EstimatorConfig& c = opt.config;
  sub->add_option("--epsilon", c.epsilon, "Target accuracy in (0, 1)")->capture_default_str();
  sub->add_option("--repeats", c.median_repeats, "Median amplification runs (0: ceil(2 log2 m))")
      ->capture_default_str();
  sub->add_option("--k-constant", c.k_constant, "Constant in the subset size k")->capture_default_str();
  sub->add_option("--keep-constant", c.uncorrelated.keep_constant, "Correlation threshold constant")
      ->capture_default_str();
  sub->add_option("--rho-cap", c.rho_cap, "Upper bound on the certified correlation of a deleted subset")
      ->capture_default_str();
  sub->add_option("--base-case", c.base_case_edges, "Edge count at which the exact determinant takes over")
      ->capture_default_str();
}

void emit(const cli::RunReport& r, const Shared& shared) {
  std::cout << (shared.format == "text" ? cli::to_text(r) : cli::to_json_text(r));
  std::cout.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate and exact spanning-tree weight of weighted graphs"};
  app.require_subcommand(1);
  Shared shared;
  cli::Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.config.seed, "Master seed")->capture_default_str();
    sub->add_option("--format", shared.format, "Output format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
  };

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate log T(G) by repeated subset deletion");
  estimate->add_option("input", opt.input, "Edge-list file")->required();
  add_common(estimate);
  add_config_flags(estimate, opt);
  estimate->add_option("--trace", opt.trace_path, "Write per-iteration records as JSON lines");

  CLI::App* exact = app.add_subcommand("exact", "Exact log T(G) via the matrix-tree theorem");
  exact->add_option("input", opt.input, "Edge-list file")->required();
  add_common(exact);
  exact->add_flag("--confirm-large", opt.confirm_large, "Allow dense factorization beyond 2000 vertices");

  CLI::App* verify = app.add_subcommand("verify", "Run a property suite on generated graphs");
  verify->add_option("suite", opt.suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(verify::suite_names()));
  add_common(verify);
  verify->add_option("--trials", opt.trials, "Number of trials (0: suite default)");

  CLI::App* phases = app.add_subcommand("phases", "Predicted phase schedule and budgets");
  phases->add_option("input", opt.input, "Edge-list file (or use --edges)");
  phases->add_option("--edges", opt.phase_edges, "Initial edge count when no file is given");
  add_common(phases);
  add_config_flags(phases, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) {
      emit(cli::cmd_estimate(opt), shared);
    } else if (exact->parsed()) {
      emit(cli::cmd_exact(opt), shared);
    } else if (verify->parsed()) {
      const cli::RunReport r = cli::cmd_verify(opt);
      emit(r, shared);
      if (!r.result.at("ok").get<bool>()) {
        std::cerr << "treecount: suite '" << opt.suite << "' failed (" << r.result.at("passed").get<std::size_t>()
                  << "/" << r.result.at("trials").get<std::size_t>() << " passed)\n";
        return 1;
      }
    } else if (phases->parsed()) {
      if (opt.input.empty() && opt.phase_edges == 0) {
        std::cerr << "treecount: phases needs an input file or --edges\n";
        return 2;
      }
      emit(cli::cmd_phases(opt), shared);
    }
  } catch (const treecount::ParseError& e) {
    std::cerr << "treecount: parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "treecount: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
