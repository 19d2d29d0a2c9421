#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochot/trace.hpp"
#include "stochot/types.hpp"

namespace stochot {

// Experiment configuration, ingested from one JSON document. Missing keys
// keep the defaults chosen by default_bench_config for the experiment at
// hand; unknown keys are rejected. CLI flags override fields afterwards.
struct BenchConfig {
  std::string experiment = "discrete";  // discrete | semidiscrete | continuous | eps_sweep
  double eps = 1e-2;
  std::vector<double> stepsize_multiples = {1.0, 3.0, 5.0};  // over 1/L for SAG
  long passes = 200;
  Index minibatch = 200;
  std::vector<std::uint64_t> seeds;  // explicit run seeds; empty derives them
  int num_seeds = 1;                 // derived seeds are base_seed .. base_seed+n-1
  std::uint64_t base_seed = 0;
  std::uint64_t instance_seed = 7;  // fixes the problem instance across run seeds
  Index size_i = 1000;
  Index size_j = 1000;
  int dim = 10;
  long iterations = 100000;             // sample budget of the stochastic solvers
  long eps_panel_iterations = 1000000;  // longer budget for the eps-comparison panel
  std::vector<Index> sample_counts = {100, 1000};  // N for the empirical surrogate runs
  double sgd_step_c = 1.0;
  double sag_step_c = 0.03;  // constant step of the empirical-surrogate SAG runs
  long reference_iterations = 10000000;
  double reference_step_c = 1.0;
  long proxy_iterations = 1000000;  // semi-discrete proxy behind the continuous bench
  Index proxy_samples = 1000;
  double kernel_step_c = 0.1;
  double kernel_sigma = 0.0;  // <= 0 selects the median-distance heuristic
  double radius_r = 1e4;
  double tol_grad_l1 = 1e-3;     // reported passes-to-tolerance threshold
  double solver_tol_grad_l1 = 0.0;  // > 0 stops discrete solvers early at this grad l1
  long checkpoint_every = 1;        // discrete-solver trace cadence, in passes
  std::vector<double> eps_grid = {0.5, 0.2, 0.1, 0.05, 0.02};   // eps_sweep grid
  std::vector<double> eps_list = {0.0, 1e-3, 1e-2, 1e-1};       // semidiscrete panel
  std::string points_x, weights_x, points_y, weights_y;  // optional file-backed clouds
  std::string embeddings_path;                           // optional embedding-table mode
  long embeddings_skip = 1000;
  std::string out_dir = ".";
  bool timings = false;  // keep measured wallclock in CSVs (breaks byte determinism)
};

// Defaults specialised per experiment (sizes, budgets, seed counts).
BenchConfig default_bench_config(const std::string& experiment);

// Parses the JSON document at path on top of base. Unknown keys error.
BenchConfig load_bench_config(const std::string& path, BenchConfig base);

// The run seeds: cfg.seeds verbatim when non-empty, else num_seeds
// consecutive values starting at base_seed.
std::vector<std::uint64_t> bench_run_seeds(const BenchConfig& cfg);

struct DiscreteRunSummary {
  std::string method;  // "sinkhorn" or "sag"
  double step_multiple = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> passes_to_tol;
  double final_grad_l1 = 0.0;
  double final_objective = 0.0;
  double final_dist = 0.0;  // l2 distance to the best final potential
  Vec final_v;              // centered
};

struct DiscreteBenchResult {
  std::vector<DiscreteRunSummary> runs;
  Vec best_v;  // final potential with the highest objective across runs
};

// Sinkhorn against average-gradient ascent at each stepsize multiple, on a
// median-rescaled squared-Euclidean instance. Emits per-run trace CSVs,
// summary.csv, and the two convergence plots.
DiscreteBenchResult run_discrete_bench(const BenchConfig& cfg);

struct SemidiscreteBenchResult {
  Vec v_star_eps;   // frozen reference potential at cfg.eps
  Vec v_star_zero;  // frozen unregularized reference potential
  std::vector<std::vector<ConvergenceTrace>> panel_eps;  // [eps_list index][seed]
  std::vector<ConvergenceTrace> panel_bias_sgd;          // [seed]
  std::vector<std::vector<ConvergenceTrace>> panel_bias_sag;  // [sample_counts index][seed]
};

// Two panels on one Gaussian-mixture instance: averaged ascent across the
// eps list against the unregularized reference, and averaged ascent versus
// the empirical-surrogate runs against the regularized reference.
SemidiscreteBenchResult run_semidiscrete_bench(const BenchConfig& cfg);

struct ContinuousBenchResult {
  std::vector<ConvergenceTrace> traces;  // one per seed
  Vec gap_high;  // per seed: mean |u_k - proxy| over the bulk of mu at k = 1e4
  Vec gap_tail;  // per seed: the same over the tails
};

// One-dimensional kernel ascent against a semi-discrete proxy potential.
// Emits per-seed trace CSVs, the potential overlay at k = 1e3/1e4/1e5, and
// the convergence plot.
ContinuousBenchResult run_continuous_bench(const BenchConfig& cfg);

struct EpsSweepRow {
  std::uint64_t seed = 0;
  double eps = 0.0;
  double dist_to_limit = 0.0;  // ||v*_eps - v*_0||_2
  double v_linf = 0.0;         // ||v*_eps||_inf
  double gap_to_exact = 0.0;   // |regularized optimum - enumerated optimum|
  double sandwich_gap = 0.0;   // max over probe v of |H_eps(v) - H_0(v)|
  double sandwich_bound = 0.0; // eps * (1 - log min_j nu_j)
};

struct EpsSweepResult {
  std::vector<EpsSweepRow> rows;
};

// Regularization-path study on small random instances: distance of the
// regularized maximizer to the unregularized limit per eps, with the
// pointwise objective bound probed at random potentials.
EpsSweepResult run_eps_sweep(const BenchConfig& cfg);

// Dispatches on cfg.experiment. Throws std::invalid_argument for an unknown
// experiment name.
void run_experiment(const BenchConfig& cfg);

}  // namespace stochot
