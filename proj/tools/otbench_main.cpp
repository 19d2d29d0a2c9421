#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "stochot/bench.hpp"
#include "stochot/types.hpp"

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int main(int argc, char** argv) {
  CLI::App app{"Benchmark runner for the stochastic transport solvers"};
  app.name("otbench");

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double eps = -1.0;
  long passes = -1;

  app.add_option("experiment", experiment,
                 "Experiment to run: discrete | semidiscrete | continuous | eps_sweep")
      ->required();
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Base run seed")->required();
  app.add_option("--out-dir", out_dir, "Output directory for CSVs and plots")->required();
  app.add_option("--eps", eps, "Override the regularization strength");
  app.add_option("--passes", passes, "Override the pass or iteration budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    stochot::BenchConfig cfg = stochot::default_bench_config(experiment);
    if (!config_path.empty()) cfg = stochot::load_bench_config(config_path, cfg);
    cfg.experiment = experiment;
    cfg.base_seed = seed;
    cfg.seeds.clear();
    cfg.out_dir = out_dir;
    if (eps >= 0.0) cfg.eps = eps;
    if (passes >= 0) {
      if (experiment == "discrete")
        cfg.passes = passes;
      else
        cfg.iterations = passes;
    }
    stochot::run_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "otbench: configuration error: %s\n", e.what());
    return 2;
  } catch (const stochot::NumericalError& e) {
    std::fprintf(stderr, "otbench: numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "otbench: error: %s\n", e.what());
    return 3;
  }
  return 0;
}
