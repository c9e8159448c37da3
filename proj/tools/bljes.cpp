#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "bljes/benchmarks.hpp"
#include "bljes/runner.hpp"
#include "bljes/simd.hpp"

namespace {

int run_command(const std::string& config_path,
                const std::vector<std::pair<std::string, std::string>>& overrides,
                bool quiet) {
  bljes::RunConfig config;
  if (!config_path.empty()) config = bljes::parse_config_file(config_path);
  for (const auto& [key, value] : overrides) {
    bljes::apply_config_entry(config, key, value);
  }

  if (!quiet) {
    std::cerr << "problem=" << config.problem
              << " method=" << bljes::method_name(config.method)
              << " mode=" << bljes::mode_name(config.mode)
              << " iters=" << config.iterations << " seeds=" << config.seeds.size()
              << " simd=" << bljes::simd::isa_name(bljes::simd::active_isa())
              << "\n";
  }

  const auto results = bljes::run_experiment(config);
  bljes::emit_results(results, config);

  int total_fallbacks = 0;
  for (const auto& r : results) {
    total_fallbacks += r.fallback_count;
    if (!quiet) {
      std::cerr << "seed " << r.seed << ": final regret "
                << r.regret_per_iteration.back() << ", fallbacks "
                << r.fallback_count << "\n";
    }
  }
  if (!quiet) {
    std::cerr << "results written to " << config.output_dir << "\n";
  }
  if (total_fallbacks > 0) {
    std::cerr << "warning: " << total_fallbacks << " fallback iterations\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilevel Bayesian optimization with joint entropy search"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string config_path;
  run->add_option("--config", config_path, "flat key=value configuration file");
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_flag = [&](const std::string& name, const std::string& key) {
    auto* opt = run->add_option_function<std::string>(
        name,
        [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); });
    return opt;
  };
  add_flag("--problem", "problem")->description("problem name[:k=v,...]");
  add_flag("--method", "method")->description("bljes | random");
  add_flag("--mode", "mode")->description("coupled | decoupled | constrained");
  add_flag("--domain", "domain")->description("pool | continuous");
  add_flag("--iters", "iters")->description("BO iterations per seed");
  add_flag("--n0", "n0")->description("initial random observations");
  add_flag("--seeds", "seeds")->description("comma list or lo..hi range");
  add_flag("--k-samples", "k-samples")->description("Monte-Carlo optimum samples");
  add_flag("--rff-dim", "rff-dim")->description("random feature count");
  add_flag("--noise-std", "noise-std")->description("observation noise, both levels");
  add_flag("--noise-std-f", "noise-std-f");
  add_flag("--noise-std-g", "noise-std-g");
  add_flag("--grid", "grid")->description("pool points per dimension override");
  add_flag("--out", "out")->description("output directory");
  add_flag("--shared-feature-map", "shared-feature-map");
  bool quiet = false;
  run->add_flag("--quiet", quiet, "suppress progress output");

  auto* problems = app.add_subcommand("problems", "list the benchmark catalog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (problems->parsed()) {
      for (const auto& name : bljes::problem_catalog()) {
        const bljes::BenchmarkSpec spec =
            name == "gp-prior" ? bljes::make_problem(name + ":seed=0")
                               : bljes::make_problem(name);
        std::printf("%-8s d_x=%d d_theta=%d N=%d M=%d grid=%d/dim\n",
                    name.c_str(), spec.d_x, spec.d_theta,
                    spec.n_upper_constraints, spec.n_lower_constraints,
                    spec.grid.points_per_dim);
      }
      return 0;
    }
    return run_command(config_path, overrides, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
