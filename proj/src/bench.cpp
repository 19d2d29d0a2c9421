#include "stochot/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "stochot/costs.hpp"
#include "stochot/io.hpp"
#include "stochot/measures.hpp"
#include "stochot/oracle.hpp"
#include "stochot/semidual.hpp"
#include "stochot/solver_continuous.hpp"
#include "stochot/solver_semidiscrete.hpp"
#include "stochot/solvers_discrete.hpp"
#include "stochot/svg.hpp"

namespace stochot {

namespace {

void ensure_out_dir(const BenchConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw std::invalid_argument("cannot create output directory " + cfg.out_dir + ": " +
                                ec.message());
}

std::string out_path(const BenchConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

Vec uniform_weights(Index n) {
  return Vec::Constant(n, 1.0 / static_cast<double>(n));
}

DiscreteMeasure gaussian_cloud(Index n, int dim, double shift, SeededRng& rng) {
  Mat atoms(dim, n);
  for (Index i = 0; i < n; ++i)
    for (Index d = 0; d < dim; ++d) atoms(d, i) = rng.normal() + shift;
  return DiscreteMeasure(std::move(atoms), uniform_weights(n));
}

Mat uniform_cloud(Index n, int dim, SeededRng& rng) {
  Mat atoms(dim, n);
  for (Index i = 0; i < n; ++i)
    for (Index d = 0; d < dim; ++d) atoms(d, i) = rng.uniform01();
  return atoms;
}

GaussianMixture random_mixture(int components, int dim, SeededRng& rng) {
  std::vector<Vec> means;
  std::vector<Mat> rotations;
  for (int k = 0; k < components; ++k) {
    Vec m(dim);
    for (Index d = 0; d < dim; ++d) m[d] = rng.uniform01();
    Mat r(dim, dim);
    for (Index a = 0; a < dim; ++a)
      for (Index b = 0; b < dim; ++b) r(a, b) = rng.uniform01();
    means.push_back(std::move(m));
    rotations.push_back(std::move(r));
  }
  return make_gaussian_mixture(means, rotations, dim);
}

std::pair<DiscreteMeasure, DiscreteMeasure> discrete_instance(const BenchConfig& cfg) {
  if (!cfg.points_x.empty() || !cfg.points_y.empty()) {
    if (cfg.points_x.empty() || cfg.points_y.empty())
      throw std::invalid_argument("discrete bench: both point-cloud files are required");
    auto opt = [](const std::string& s) {
      return s.empty() ? std::optional<std::string>{} : std::optional<std::string>{s};
    };
    return {load_discrete_measure(cfg.points_x, opt(cfg.weights_x)),
            load_discrete_measure(cfg.points_y, opt(cfg.weights_y))};
  }
  if (!cfg.embeddings_path.empty()) {
    SeededRng inst(cfg.instance_seed);
    SeededRng rx = inst.split(1), ry = inst.split(2);
    EmbeddingTable tx = load_embeddings(cfg.embeddings_path, cfg.embeddings_skip,
                                        cfg.size_i, rx);
    EmbeddingTable ty = load_embeddings(cfg.embeddings_path, cfg.embeddings_skip,
                                        cfg.size_j, ry);
    return {DiscreteMeasure(tx.vectors, uniform_weights(tx.vectors.cols())),
            DiscreteMeasure(ty.vectors, uniform_weights(ty.vectors.cols()))};
  }
  SeededRng inst(cfg.instance_seed);
  SeededRng rx = inst.split(1), ry = inst.split(2);
  return {gaussian_cloud(cfg.size_i, cfg.dim, 0.0, rx),
          gaussian_cloud(cfg.size_j, cfg.dim, 0.3, ry)};
}

double lower_median(std::vector<double> vals) {
  if (vals.empty()) throw std::invalid_argument("median of an empty set");
  std::size_t mid = (vals.size() - 1) / 2;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
  return vals[mid];
}

// Per-checkpoint median of the distance column across equally gridded runs.
SvgSeries median_dist_curve(const std::vector<ConvergenceTrace>& traces,
                            const std::string& label) {
  SvgSeries s;
  s.label = label;
  if (traces.empty()) return s;
  std::size_t n = traces.front().checkpoints.size();
  for (const ConvergenceTrace& t : traces) n = std::min(n, t.checkpoints.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> vals;
    for (const ConvergenceTrace& t : traces)
      if (t.checkpoints[k].dist_ref_l2) vals.push_back(*t.checkpoints[k].dist_ref_l2);
    if (vals.empty()) continue;
    s.x.push_back(traces.front().checkpoints[k].pass);
    s.y.push_back(lower_median(std::move(vals)));
  }
  return s;
}

double dist_at(const ConvergenceTrace& trace, long k) {
  for (const TraceCheckpoint& cp : trace.checkpoints)
    if (cp.pass == static_cast<double>(k) && cp.dist_ref_l2) return *cp.dist_ref_l2;
  if (!trace.checkpoints.empty() && trace.checkpoints.back().dist_ref_l2)
    return *trace.checkpoints.back().dist_ref_l2;
  return std::numeric_limits<double>::quiet_NaN();
}

// u restricted to the entries appended up to and including step max_step,
// evaluated on a 1D grid.
Vec eval_u_prefix_grid(const KernelExpansion& e, const Vec& grid, long max_step) {
  Vec out = Vec::Zero(grid.size());
  Eigen::Map<const Mat> xs = e.xs();
  double s2 = e.kernel_x().sigma * e.kernel_x().sigma;
  for (Index i = 0; i < e.size(); ++i) {
    if (e.step_of_entry(i) > max_step) break;
    double xi = xs(0, i);
    out.array() += e.alpha(i) * (-(grid.array() - xi).square() / s2).exp();
  }
  return out;
}

}  // namespace

BenchConfig default_bench_config(const std::string& experiment) {
  BenchConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "discrete") {
    cfg.eps = 1e-2;
    cfg.passes = 200;
    cfg.minibatch = 200;
    cfg.size_i = 1000;
    cfg.size_j = 1000;
    // High ambient dimension concentrates pairwise costs, which keeps the
    // median-rescaled instance well conditioned at eps = 1e-2.
    cfg.dim = 300;
    cfg.num_seeds = 1;
  } else if (experiment == "semidiscrete") {
    cfg.eps = 1e-2;
    cfg.size_j = 10;
    cfg.dim = 3;
    cfg.num_seeds = 10;
    cfg.instance_seed = 0;
    cfg.iterations = 100000;
    cfg.eps_panel_iterations = 1000000;
  } else if (experiment == "continuous") {
    cfg.eps = 1e-1;
    cfg.dim = 1;
    cfg.num_seeds = 10;
    cfg.iterations = 100000;
  } else if (experiment == "eps_sweep") {
    cfg.size_i = 5;
    cfg.size_j = 5;
    cfg.dim = 2;
    cfg.num_seeds = 10;
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  return cfg;
}

BenchConfig load_bench_config(const std::string& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
    // The experiment key re-seeds the defaults, so it must apply before any
    // other key regardless of document order.
    if (j.contains("experiment")) base = default_bench_config(j["experiment"].get<std::string>());
    for (const auto& item : j.items()) {
      const std::string& key = item.key();
      const nlohmann::json& val = item.value();
      if (key == "experiment")
        ;  // applied above
      else if (key == "eps")
        base.eps = val.get<double>();
      else if (key == "stepsize_multiples")
        base.stepsize_multiples = val.get<std::vector<double>>();
      else if (key == "passes")
        base.passes = val.get<long>();
      else if (key == "minibatch")
        base.minibatch = val.get<long>();
      else if (key == "seeds")
        base.seeds = val.get<std::vector<std::uint64_t>>();
      else if (key == "num_seeds")
        base.num_seeds = val.get<int>();
      else if (key == "instance_seed")
        base.instance_seed = val.get<std::uint64_t>();
      else if (key == "size_i")
        base.size_i = val.get<long>();
      else if (key == "size_j")
        base.size_j = val.get<long>();
      else if (key == "dim")
        base.dim = val.get<int>();
      else if (key == "iterations")
        base.iterations = val.get<long>();
      else if (key == "eps_panel_iterations")
        base.eps_panel_iterations = val.get<long>();
      else if (key == "sample_counts") {
        base.sample_counts.clear();
        for (long n : val.get<std::vector<long>>()) base.sample_counts.push_back(n);
      } else if (key == "sgd_step_c")
        base.sgd_step_c = val.get<double>();
      else if (key == "sag_step_c")
        base.sag_step_c = val.get<double>();
      else if (key == "reference_iterations")
        base.reference_iterations = val.get<long>();
      else if (key == "reference_step_c")
        base.reference_step_c = val.get<double>();
      else if (key == "proxy_iterations")
        base.proxy_iterations = val.get<long>();
      else if (key == "proxy_samples")
        base.proxy_samples = val.get<long>();
      else if (key == "kernel_step_c")
        base.kernel_step_c = val.get<double>();
      else if (key == "kernel_sigma")
        base.kernel_sigma = val.get<double>();
      else if (key == "radius_r")
        base.radius_r = val.get<double>();
      else if (key == "tol_grad_l1")
        base.tol_grad_l1 = val.get<double>();
      else if (key == "solver_tol_grad_l1")
        base.solver_tol_grad_l1 = val.get<double>();
      else if (key == "checkpoint_every")
        base.checkpoint_every = val.get<long>();
      else if (key == "eps_grid")
        base.eps_grid = val.get<std::vector<double>>();
      else if (key == "eps_list")
        base.eps_list = val.get<std::vector<double>>();
      else if (key == "points_x")
        base.points_x = val.get<std::string>();
      else if (key == "weights_x")
        base.weights_x = val.get<std::string>();
      else if (key == "points_y")
        base.points_y = val.get<std::string>();
      else if (key == "weights_y")
        base.weights_y = val.get<std::string>();
      else if (key == "embeddings_path")
        base.embeddings_path = val.get<std::string>();
      else if (key == "embeddings_skip")
        base.embeddings_skip = val.get<long>();
      else if (key == "out_dir")
        base.out_dir = val.get<std::string>();
      else if (key == "timings")
        base.timings = val.get<bool>();
      else
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return base;
}

std::vector<std::uint64_t> bench_run_seeds(const BenchConfig& cfg) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  if (cfg.num_seeds < 1)
    throw std::invalid_argument("num_seeds must be at least 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.num_seeds; ++i)
    seeds.push_back(cfg.base_seed + static_cast<std::uint64_t>(i));
  return seeds;
}

DiscreteBenchResult run_discrete_bench(const BenchConfig& cfg) {
  if (!(cfg.eps > 0.0))
    throw std::invalid_argument("discrete bench: eps must be positive");
  ensure_out_dir(cfg);
  Epsilon eps(cfg.eps);

  auto [mu, nu] = discrete_instance(cfg);
  Mat pool(mu.dim(), mu.size() + nu.size());
  pool << mu.atoms(), nu.atoms();
  SeededRng cost_rng = SeededRng(cfg.instance_seed).split(3);
  CostFunction scaled = median_rescale(CostFunction::squared_euclidean(), pool, 2000, cost_rng);
  CostMatrix cost = build_cost_matrix(scaled, mu.atoms(), nu.atoms());
  Index batch = std::min<Index>(cfg.minibatch, mu.size());
  double lip = lipschitz_bound(mu, eps, batch);

  struct RunSpec {
    std::string method;
    double mult;
  };
  std::vector<RunSpec> specs{{"sinkhorn", 0.0}};
  for (double m : cfg.stepsize_multiples) specs.push_back({"sag", m});

  DiscreteBenchResult out;
  std::vector<std::vector<std::string>> summary;
  summary.push_back({"method", "params", "seed", "eps", "passes_to_tol", "final_grad_l1",
                     "final_objective", "final_dist_to_best"});

  std::vector<std::uint64_t> seeds = bench_run_seeds(cfg);
  for (std::uint64_t seed : seeds) {
    std::vector<SolveResult> results;
    std::vector<std::string> params;
    for (const RunSpec& sp : specs) {
      SolveConfig sc;
      sc.eps = eps;
      sc.max_passes = cfg.passes;
      sc.checkpoint_every = cfg.checkpoint_every;
      sc.tol_grad_l1 = cfg.solver_tol_grad_l1;
      sc.record_iterates = true;
      sc.seed = seed;
      if (sp.method == "sinkhorn") {
        results.push_back(sinkhorn(mu, nu, cost, sc));
        params.push_back("eps" + format_double(cfg.eps));
      } else {
        sc.minibatch = batch;
        sc.step_c = sp.mult / lip;
        results.push_back(sag_solve(mu, nu, cost, sc));
        params.push_back("m" + format_double(sp.mult) + "_b" + std::to_string(sc.minibatch));
      }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
      if (results[i].final_objective > results[best].final_objective) best = i;
    Vec v_best = results[best].potentials.v;
    if (seed == seeds.front()) out.best_v = v_best;

    std::vector<SvgSeries> grad_series, dist_series;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      SolveResult& res = results[i];
      ConvergenceTrace& tr = res.trace;
      for (std::size_t k = 0; k < tr.checkpoints.size(); ++k)
        tr.checkpoints[k].dist_ref_l2 = (tr.iterates[k] - v_best).norm();
      std::string fname =
          "trace_" + specs[i].method + "_" + params[i] + "_s" + std::to_string(seed) + ".csv";
      write_trace_csv(out_path(cfg, fname), tr, !cfg.timings);

      DiscreteRunSummary run;
      run.method = specs[i].method;
      run.step_multiple = specs[i].mult;
      run.seed = seed;
      run.passes_to_tol = passes_to_tolerance(tr, cfg.tol_grad_l1);
      run.final_grad_l1 = res.final_grad_l1;
      run.final_objective = res.final_objective;
      run.final_dist = (res.potentials.v - v_best).norm();
      run.final_v = res.potentials.v;
      summary.push_back({run.method, params[i], std::to_string(seed), format_double(cfg.eps),
                         run.passes_to_tol ? format_double(*run.passes_to_tol) : "",
                         format_double(run.final_grad_l1), format_double(run.final_objective),
                         format_double(run.final_dist)});

      if (seed == seeds.front()) {
        std::string label = specs[i].method == "sinkhorn"
                                ? "Sinkhorn"
                                : "SAG " + format_double(specs[i].mult) + "/L";
        SvgSeries gs{label, {}, {}}, ds{label, {}, {}};
        for (const TraceCheckpoint& cp : tr.checkpoints) {
          gs.x.push_back(cp.pass);
          gs.y.push_back(cp.grad_l1.value_or(0.0));
          ds.x.push_back(cp.pass);
          ds.y.push_back(cp.dist_ref_l2.value_or(0.0));
        }
        grad_series.push_back(std::move(gs));
        dist_series.push_back(std::move(ds));
      }
      out.runs.push_back(std::move(run));
    }
    if (seed == seeds.front()) {
      emit_svg(out_path(cfg, "plot_grad_l1.svg"), grad_series,
               {"Gradient norm vs passes", "passes", "grad l1", false, true});
      emit_svg(out_path(cfg, "plot_dist_to_best.svg"), dist_series,
               {"Distance to best potential", "passes", "||v - v*||_2", false, true});
    }
  }
  write_csv_rows(out_path(cfg, "summary.csv"), summary);
  return out;
}

SemidiscreteBenchResult run_semidiscrete_bench(const BenchConfig& cfg) {
  if (!(cfg.eps > 0.0))
    throw std::invalid_argument("semidiscrete bench: eps must be positive");
  ensure_out_dir(cfg);
  Epsilon eps(cfg.eps);

  SeededRng inst(cfg.instance_seed);
  SeededRng r_mu = inst.split(0), r_nu = inst.split(1), r_atoms = inst.split(2);
  SeededRng r_pool = inst.split(3), r_med = inst.split(4);
  GaussianMixture mu = random_mixture(3, cfg.dim, r_mu);
  GaussianMixture nu_gen = random_mixture(3, cfg.dim, r_nu);
  DiscreteMeasure nu = empirical_from(nu_gen, cfg.size_j, r_atoms);

  // Rescale the cost so the median over a pooled sample is 0.1: at unit
  // median the epsilon panel's smallest levels are indistinguishable from the
  // averaged-SGD noise floor, while at a tenth the bias ladder separates.
  Mat pool(cfg.dim, 1000 + nu.size());
  for (Index i = 0; i < 1000; ++i) pool.col(i) = mu.draw(r_pool);
  for (Index j = 0; j < nu.size(); ++j) pool.col(1000 + j) = nu.atom(j);
  CostFunction c =
      median_rescale(CostFunction::squared_euclidean(), pool, 2000, r_med);
  c = c.with_scale(c.scale() / 10.0);

  SemidiscreteBenchResult out;
  out.v_star_zero = semidiscrete_reference(mu, nu, c, Epsilon(0.0), cfg.reference_iterations,
                                           cfg.reference_step_c, 0);
  out.v_star_eps = semidiscrete_reference(mu, nu, c, eps, cfg.reference_iterations,
                                          cfg.reference_step_c, 0);

  std::vector<std::vector<std::string>> summary;
  summary.push_back({"panel", "method", "eps", "n_samples", "seed", "final_dist"});
  std::vector<std::uint64_t> seeds = bench_run_seeds(cfg);

  out.panel_eps.resize(cfg.eps_list.size());
  for (std::size_t ei = 0; ei < cfg.eps_list.size(); ++ei) {
    double eps_a = cfg.eps_list[ei];
    for (std::uint64_t seed : seeds) {
      SolveConfig sc;
      sc.eps = Epsilon(eps_a);
      sc.max_passes = cfg.eps_panel_iterations;
      sc.step_c = cfg.sgd_step_c;
      sc.seed = seed;
      SeededRng rng(seed);
      SgdResult res = sgd_solve(mu, nu, c, Epsilon(eps_a), sc, rng, &out.v_star_zero);
      double final_dist = res.trace.back().dist_ref_l2.value_or(0.0);
      write_trace_csv(out_path(cfg, "trace_sgd_to_v0_eps" + format_double(eps_a) + "_s" +
                                        std::to_string(seed) + ".csv"),
                      res.trace, !cfg.timings);
      summary.push_back({"eps", "sgd", format_double(eps_a), "", std::to_string(seed),
                         format_double(final_dist)});
      out.panel_eps[ei].push_back(std::move(res.trace));
    }
  }

  for (std::uint64_t seed : seeds) {
    SolveConfig sc;
    sc.eps = eps;
    sc.max_passes = cfg.iterations;
    sc.step_c = cfg.sgd_step_c;
    sc.seed = seed;
    SeededRng rng(seed);
    SgdResult res = sgd_solve(mu, nu, c, eps, sc, rng, &out.v_star_eps);
    double final_dist = res.trace.back().dist_ref_l2.value_or(0.0);
    write_trace_csv(out_path(cfg, "trace_sgd_to_veps_eps" + format_double(cfg.eps) + "_s" +
                                      std::to_string(seed) + ".csv"),
                    res.trace, !cfg.timings);
    summary.push_back({"bias", "sgd", format_double(cfg.eps), "", std::to_string(seed),
                       format_double(final_dist)});
    out.panel_bias_sgd.push_back(std::move(res.trace));
  }

  out.panel_bias_sag.resize(cfg.sample_counts.size());
  for (std::size_t ni = 0; ni < cfg.sample_counts.size(); ++ni) {
    Index n_samples = cfg.sample_counts[ni];
    for (std::uint64_t seed : seeds) {
      SolveConfig sc;
      sc.eps = eps;
      sc.max_passes = cfg.iterations;
      sc.minibatch = 1;
      sc.step_c = cfg.sag_step_c;
      sc.seed = seed;
      SeededRng rng = SeededRng(seed).split(0x5A47 + static_cast<std::uint64_t>(ni));
      SgdResult res = sag_on_samples(mu, nu, c, eps, n_samples, sc, rng, &out.v_star_eps);
      double final_dist = res.trace.back().dist_ref_l2.value_or(0.0);
      write_trace_csv(out_path(cfg, "trace_sag_to_veps_N" + std::to_string(n_samples) + "_s" +
                                        std::to_string(seed) + ".csv"),
                      res.trace, !cfg.timings);
      summary.push_back({"bias", "sag", format_double(cfg.eps), std::to_string(n_samples),
                         std::to_string(seed), format_double(final_dist)});
      out.panel_bias_sag[ni].push_back(std::move(res.trace));
    }
  }
  write_csv_rows(out_path(cfg, "summary.csv"), summary);

  std::vector<SvgSeries> eps_series;
  for (std::size_t ei = 0; ei < cfg.eps_list.size(); ++ei)
    eps_series.push_back(
        median_dist_curve(out.panel_eps[ei], "eps " + format_double(cfg.eps_list[ei])));
  emit_svg(out_path(cfg, "plot_semidiscrete_eps.svg"), eps_series,
           {"Distance to the unregularized potential", "iterations", "relative l2 error",
            true, true});

  std::vector<SvgSeries> bias_series;
  bias_series.push_back(median_dist_curve(out.panel_bias_sgd, "SGD"));
  for (std::size_t ni = 0; ni < cfg.sample_counts.size(); ++ni)
    bias_series.push_back(median_dist_curve(
        out.panel_bias_sag[ni], "SAG N=" + std::to_string(cfg.sample_counts[ni])));
  emit_svg(out_path(cfg, "plot_sgd_vs_sag.svg"), bias_series,
           {"Discretization bias of the empirical surrogate", "samples",
            "relative l2 error", true, true});
  return out;
}

ContinuousBenchResult run_continuous_bench(const BenchConfig& cfg) {
  if (!(cfg.eps > 0.0))
    throw std::invalid_argument("continuous bench: eps must be positive");
  ensure_out_dir(cfg);
  Epsilon eps(cfg.eps);

  // 1D instance: unit Gaussian source, well separated bimodal target.
  GaussianMixture mu({{Vec::Zero(1), Mat::Identity(1, 1), 1.0}});
  Vec m_left(1), m_right(1);
  m_left << -1.0;
  m_right << 1.0;
  Mat var(1, 1);
  var << 0.09;
  GaussianMixture nu({{m_left, var, 0.5}, {m_right, var, 0.5}});
  CostFunction c = CostFunction::squared_euclidean();

  // Proxy potential: smoothed conjugate of a long averaged-ascent run on an
  // empirical surrogate of nu.
  SeededRng prng(cfg.instance_seed);
  SeededRng pr_atoms = prng.split(1), pr_solve = prng.split(2);
  DiscreteMeasure nu_hat = empirical_from(nu, cfg.proxy_samples, pr_atoms);
  SolveConfig psc;
  psc.eps = eps;
  psc.max_passes = cfg.proxy_iterations;
  psc.step_c = cfg.sgd_step_c;
  Vec v_hat = sgd_solve(mu, nu_hat, c, eps, psc, pr_solve).v_avg;
  std::function<double(const Vec&)> proxy = [nu_hat, v_hat, c, eps](const Vec& x) {
    Vec r(nu_hat.size());
    for (Index j = 0; j < nu_hat.size(); ++j) r[j] = c(x, nu_hat.atom(j)) - v_hat[j];
    return softmin(r, nu_hat.weights(), eps);
  };

  double sigma_x, sigma_y;
  if (cfg.kernel_sigma > 0.0) {
    sigma_x = sigma_y = cfg.kernel_sigma;
  } else {
    SeededRng kx_rng = SeededRng(cfg.instance_seed).split(3);
    SeededRng ky_rng = SeededRng(cfg.instance_seed).split(4);
    sigma_x = median_pairwise_distance(mu, kx_rng);
    sigma_y = median_pairwise_distance(nu, ky_rng);
  }
  GaussianKernel kernel_x{sigma_x}, kernel_y{sigma_y};

  // Overlay grid spans the bulk of mu; the density weights center the
  // potentials, which match the proxy only modulo an additive constant.
  const Index grid_n = 121;
  Vec grid(grid_n), grid_w(grid_n);
  for (Index i = 0; i < grid_n; ++i) {
    grid[i] = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    grid_w[i] = std::exp(-0.5 * grid[i] * grid[i]);
  }
  grid_w /= grid_w.sum();
  Vec proxy_grid(grid_n);
  for (Index i = 0; i < grid_n; ++i) proxy_grid[i] = proxy(grid.segment(i, 1));
  proxy_grid.array() -= grid_w.dot(proxy_grid);

  ContinuousBenchResult out;
  std::vector<std::uint64_t> seeds = bench_run_seeds(cfg);
  out.gap_high = Vec::Zero(static_cast<Index>(seeds.size()));
  out.gap_tail = Vec::Zero(static_cast<Index>(seeds.size()));
  std::vector<std::vector<std::string>> summary;
  summary.push_back(
      {"seed", "err_k1e3", "err_k1e4", "err_final", "gap_high", "gap_tail"});
  std::vector<SvgSeries> err_series;

  for (std::size_t si = 0; si < seeds.size(); ++si) {
    std::uint64_t seed = seeds[si];
    SolveConfig ksc;
    ksc.eps = eps;
    ksc.max_passes = cfg.iterations;
    ksc.step_c = cfg.kernel_step_c;
    ksc.radius_r = cfg.radius_r;
    ksc.seed = seed;
    SeededRng rng(seed);
    KernelSgdResult res = kernel_sgd_solve(mu, nu, c, kernel_x, kernel_y, eps, ksc, rng,
                                           &proxy, 512);
    write_trace_csv(out_path(cfg, "trace_kernel_eps" + format_double(cfg.eps) + "_s" +
                                      std::to_string(seed) + ".csv"),
                    res.trace, !cfg.timings);

    long k_mid = std::min<long>(10000, cfg.iterations);
    Vec u_mid = eval_u_prefix_grid(res.expansion, grid, k_mid);
    u_mid.array() -= grid_w.dot(u_mid);
    double high_acc = 0.0, tail_acc = 0.0;
    Index high_n = 0, tail_n = 0;
    for (Index i = 0; i < grid_n; ++i) {
      double gap = std::abs(u_mid[i] - proxy_grid[i]);
      if (std::abs(grid[i]) <= 1.0) {
        high_acc += gap;
        ++high_n;
      } else if (std::abs(grid[i]) >= 2.0) {
        tail_acc += gap;
        ++tail_n;
      }
    }
    out.gap_high[static_cast<Index>(si)] = high_acc / static_cast<double>(high_n);
    out.gap_tail[static_cast<Index>(si)] = tail_acc / static_cast<double>(tail_n);

    if (si == 0) {
      std::vector<long> overlay_ks;
      for (long k : {1000L, 10000L, 100000L})
        if (k <= cfg.iterations) overlay_ks.push_back(k);
      if (overlay_ks.empty() || overlay_ks.back() != cfg.iterations)
        overlay_ks.push_back(cfg.iterations);
      std::vector<std::vector<std::string>> overlay;
      std::vector<std::string> header{"x", "proxy"};
      std::vector<Vec> u_cols;
      for (long k : overlay_ks) {
        header.push_back("u_k" + std::to_string(k));
        Vec uk = eval_u_prefix_grid(res.expansion, grid, k);
        uk.array() -= grid_w.dot(uk);
        u_cols.push_back(std::move(uk));
      }
      overlay.push_back(std::move(header));
      for (Index i = 0; i < grid_n; ++i) {
        std::vector<std::string> row{format_double(grid[i]), format_double(proxy_grid[i])};
        for (const Vec& uk : u_cols) row.push_back(format_double(uk[i]));
        overlay.push_back(std::move(row));
      }
      write_csv_rows(out_path(cfg, "u_overlay.csv"), overlay);

      std::vector<SvgSeries> overlay_series;
      SvgSeries ps{"proxy", {}, {}};
      for (Index i = 0; i < grid_n; ++i) {
        ps.x.push_back(grid[i]);
        ps.y.push_back(proxy_grid[i]);
      }
      overlay_series.push_back(std::move(ps));
      for (std::size_t ki = 0; ki < overlay_ks.size(); ++ki) {
        SvgSeries us{"k=" + std::to_string(overlay_ks[ki]), {}, {}};
        for (Index i = 0; i < grid_n; ++i) {
          us.x.push_back(grid[i]);
          us.y.push_back(u_cols[ki][i]);
        }
        overlay_series.push_back(std::move(us));
      }
      emit_svg(out_path(cfg, "plot_u_overlay.svg"), overlay_series,
               {"Learned potential against the proxy", "x", "u (centered)", false, false});
    }

    summary.push_back({std::to_string(seed), format_double(dist_at(res.trace, 1000)),
                       format_double(dist_at(res.trace, 10000)),
                       format_double(res.trace.back().dist_ref_l2.value_or(0.0)),
                       format_double(out.gap_high[static_cast<Index>(si)]),
                       format_double(out.gap_tail[static_cast<Index>(si)])});
    SvgSeries es{"seed " + std::to_string(seed), {}, {}};
    for (const TraceCheckpoint& cp : res.trace.checkpoints)
      if (cp.dist_ref_l2) {
        es.x.push_back(cp.pass);
        es.y.push_back(*cp.dist_ref_l2);
      }
    err_series.push_back(std::move(es));
    out.traces.push_back(std::move(res.trace));
  }
  write_csv_rows(out_path(cfg, "summary.csv"), summary);
  emit_svg(out_path(cfg, "plot_continuous_err.svg"), err_series,
           {"Convergence of the learned potential", "iterations", "relative l2 error", true,
            true});
  return out;
}

EpsSweepResult run_eps_sweep(const BenchConfig& cfg) {
  if (cfg.eps_grid.empty())
    throw std::invalid_argument("eps_sweep: the eps grid must not be empty");
  ensure_out_dir(cfg);
  const long polish_steps = 200000;
  const double polish_step_c = 0.1;
  const int probe_count = 20;

  EpsSweepResult out;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"seed", "eps", "dist_to_v0", "v_linf", "gap_to_exact", "sandwich_gap",
                  "sandwich_bound"});
  std::vector<SvgSeries> dist_series;

  for (std::uint64_t seed : bench_run_seeds(cfg)) {
    SeededRng rng(seed);
    SeededRng rx = rng.split(1), ry = rng.split(2), rv = rng.split(3);
    Mat xs = uniform_cloud(cfg.size_i, cfg.dim, rx);
    Mat ys = uniform_cloud(cfg.size_j, cfg.dim, ry);
    DiscreteMeasure mu(xs, uniform_weights(cfg.size_i));
    DiscreteMeasure nu(ys, uniform_weights(cfg.size_j));
    CostMatrix cost = build_cost_matrix(CostFunction::squared_euclidean(), xs, ys);

    EpsConvergenceReport rep =
        eps_convergence_check(mu, nu, cost.entries, cfg.eps_grid, polish_steps, polish_step_c);
    double exact = std::numeric_limits<double>::quiet_NaN();
    if (cfg.size_i == cfg.size_j && cfg.size_i <= 7)
      exact = brute_force_ot(mu, nu, cost.entries);

    Mat probes(cfg.size_j, probe_count);
    for (Index t = 0; t < probe_count; ++t)
      for (Index j = 0; j < cfg.size_j; ++j) probes(j, t) = rv.normal();
    Vec h_zero(probe_count);
    for (Index t = 0; t < probe_count; ++t)
      h_zero[t] = semidual_objective(probes.col(t), mu.weights(), nu.weights(), cost.entries,
                                     Epsilon(0.0));
    double bound_base = 1.0 - std::log(nu.weights().minCoeff());

    SvgSeries ds{"seed " + std::to_string(seed), {}, {}};
    for (std::size_t gi = 0; gi < cfg.eps_grid.size(); ++gi) {
      double e = cfg.eps_grid[gi];
      double max_gap = 0.0;
      for (Index t = 0; t < probe_count; ++t) {
        double h_eps = semidual_objective(probes.col(t), mu.weights(), nu.weights(),
                                          cost.entries, Epsilon(e));
        max_gap = std::max(max_gap, std::abs(h_eps - h_zero[t]));
      }
      EpsSweepRow row;
      row.seed = seed;
      row.eps = e;
      row.dist_to_limit = rep.dist_to_limit[gi];
      row.v_linf = rep.linf_norms[gi];
      row.gap_to_exact = std::abs(rep.objectives[gi] - exact);
      row.sandwich_gap = max_gap;
      row.sandwich_bound = e * bound_base;
      rows.push_back({std::to_string(seed), format_double(e),
                      format_double(row.dist_to_limit), format_double(row.v_linf),
                      format_double(row.gap_to_exact), format_double(row.sandwich_gap),
                      format_double(row.sandwich_bound)});
      ds.x.push_back(e);
      ds.y.push_back(row.dist_to_limit);
      out.rows.push_back(std::move(row));
    }
    dist_series.push_back(std::move(ds));
  }
  write_csv_rows(out_path(cfg, "summary.csv"), rows);
  emit_svg(out_path(cfg, "plot_eps_sweep.svg"), dist_series,
           {"Regularization path toward the unregularized maximizer", "eps",
            "||v*_eps - v*_0||_2", true, true});
  return out;
}

void run_experiment(const BenchConfig& cfg) {
  if (cfg.experiment == "discrete")
    run_discrete_bench(cfg);
  else if (cfg.experiment == "semidiscrete")
    run_semidiscrete_bench(cfg);
  else if (cfg.experiment == "continuous")
    run_continuous_bench(cfg);
  else if (cfg.experiment == "eps_sweep")
    run_eps_sweep(cfg);
  else
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace stochot
