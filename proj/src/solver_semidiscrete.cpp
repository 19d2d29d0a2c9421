#include "stochot/solver_semidiscrete.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stochot/semidual.hpp"

namespace stochot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

void step_impl(SgdState& state, Eigen::Ref<const Vec> x, const DiscreteMeasure& nu,
               const CostFunction& c, Epsilon eps, double step_c, Vec& r, Vec& chi) {
  for (Index j = 0; j < nu.size(); ++j) r[j] = c(x, nu.atom(j)) - state.v_inner[j];
  softmin_and_chi(r, nu.weights(), eps, chi);
  long k = state.k + 1;
  double step = step_c / std::sqrt(static_cast<double>(k));
  state.v_inner.noalias() += step * (nu.weights() - chi);
  double kk = static_cast<double>(k);
  state.v_avg = (1.0 / kk) * state.v_inner + ((kk - 1.0) / kk) * state.v_avg;
  state.k = k;
}

}  // namespace

SgdState make_sgd_state(Index atoms) {
  if (atoms <= 0) throw std::invalid_argument("make_sgd_state: need at least one atom");
  SgdState s;
  s.v_inner = Vec::Zero(atoms);
  s.v_avg = Vec::Zero(atoms);
  return s;
}

SgdState& sgd_step(SgdState& state, Eigen::Ref<const Vec> x, const DiscreteMeasure& nu,
                   const CostFunction& c, Epsilon eps, double step_c) {
  if (state.v_inner.size() != nu.size())
    throw std::invalid_argument("sgd_step: state size does not match atom count");
  Vec r(nu.size()), chi(nu.size());
  step_impl(state, x, nu, c, eps, step_c, r, chi);
  return state;
}

SgdResult sgd_solve(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                    const CostFunction& c, Epsilon eps, const SolveConfig& cfg,
                    SeededRng& rng, const Vec* v_ref) {
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("sgd_solve: sampler and atoms disagree on dimension");
  double step_c = cfg.step_c > 0.0 ? cfg.step_c : eps.value();
  if (step_c <= 0.0)
    throw std::invalid_argument("sgd_solve: step_c must be set explicitly when eps = 0");

  // Held-out batch for objective estimates, on its own stream so the iterate
  // sample sequence does not depend on the batch size.
  SeededRng held_rng = rng.split(0x48454C44);
  const Index held_n = 512;
  Mat held(nu.dim(), held_n);
  for (Index m = 0; m < held_n; ++m) held.col(m) = mu.draw(held_rng);

  double ref_norm = v_ref ? v_ref->norm() : 0.0;
  SgdState state = make_sgd_state(nu.size());
  Vec r(nu.size()), chi(nu.size());
  SgdResult result;
  double elapsed_ms = 0.0;

  auto mc_objective = [&]() {
    double acc = 0.0;
    for (Index m = 0; m < held_n; ++m) {
      for (Index j = 0; j < nu.size(); ++j) r[j] = c(held.col(m), nu.atom(j)) - state.v_avg[j];
      acc += softmin(r, nu.weights(), eps);
    }
    double val = nu.weights().dot(state.v_avg) + acc / static_cast<double>(held_n);
    return eps.regularized() ? val - eps.value() : val;
  };
  auto checkpoint = [&]() {
    TraceCheckpoint cp;
    cp.pass = static_cast<double>(state.k);
    cp.objective = mc_objective();
    cp.wallclock_ms = elapsed_ms;
    if (v_ref) {
      double d = (state.v_avg - *v_ref).norm();
      cp.dist_ref_l2 = ref_norm > 0.0 ? d / ref_norm : d;
    }
    if (cfg.record_iterates) result.trace.iterates.push_back(state.v_avg);
    result.trace.append(std::move(cp));
  };

  std::vector<long> grid = geometric_checkpoints(cfg.max_passes);
  std::size_t next = 0;
  for (long k = 1; k <= cfg.max_passes; ++k) {
    auto t0 = Clock::now();
    Point x = mu.draw(rng);
    step_impl(state, x, nu, c, eps, step_c, r, chi);
    elapsed_ms += ms_between(t0, Clock::now());
    if (next < grid.size() && state.k == grid[next]) {
      checkpoint();
      ++next;
    }
  }
  if (result.trace.empty()) checkpoint();

  result.v_avg = centered(state.v_avg);
  result.v_inner = state.v_inner;
  return result;
}

SgdResult sag_on_samples(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                         const CostFunction& c, Epsilon eps, Index n_samples,
                         const SolveConfig& cfg, SeededRng& rng, const Vec* v_ref) {
  if (n_samples <= 0)
    throw std::invalid_argument("sag_on_samples: sample count must be positive");
  DiscreteMeasure mu_hat = empirical_from(mu, n_samples, rng);
  CostMatrix cost = build_cost_matrix(c, mu_hat.atoms(), nu.atoms());

  SolveConfig inner = cfg;
  inner.eps = eps;
  inner.max_passes = (cfg.max_passes + n_samples - 1) / n_samples;
  SolveResult sag = sag_solve(mu_hat, nu, cost, inner, v_ref);

  // Rewrite to the stochastic convention: sample count on the x axis,
  // relative distance to the reference.
  double ref_norm = v_ref ? v_ref->norm() : 0.0;
  SgdResult out;
  for (const TraceCheckpoint& cp : sag.trace.checkpoints) {
    TraceCheckpoint scaled = cp;
    scaled.pass = cp.pass * static_cast<double>(n_samples);
    if (scaled.dist_ref_l2 && ref_norm > 0.0) *scaled.dist_ref_l2 /= ref_norm;
    out.trace.append(std::move(scaled));
  }
  out.trace.iterates = std::move(sag.trace.iterates);
  out.v_avg = sag.potentials.v;
  out.v_inner = sag.potentials.v;
  return out;
}

Vec semidiscrete_reference(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                           const CostFunction& c, Epsilon eps, long iterations,
                           double step_c, std::uint64_t seed) {
  SeededRng rng(seed);
  SgdState state = make_sgd_state(nu.size());
  Vec r(nu.size()), chi(nu.size());
  for (long k = 0; k < iterations; ++k) {
    Point x = mu.draw(rng);
    step_impl(state, x, nu, c, eps, step_c, r, chi);
  }
  return centered(state.v_avg);
}

double mc_semidual_objective(Eigen::Ref<const Vec> v, const ContinuousSampler& mu,
                             const DiscreteMeasure& nu, const CostFunction& c, Epsilon eps,
                             Index n, SeededRng& rng) {
  if (n <= 0) throw std::invalid_argument("mc_semidual_objective: need a positive batch");
  double acc = 0.0;
  for (Index m = 0; m < n; ++m) acc += barh(mu.draw(rng), v, nu, c, eps);
  return acc / static_cast<double>(n);
}

}  // namespace stochot
