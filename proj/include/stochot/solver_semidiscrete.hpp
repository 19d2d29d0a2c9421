#pragma once

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/solvers_discrete.hpp"
#include "stochot/trace.hpp"
#include "stochot/types.hpp"

namespace stochot {

// Averaged stochastic ascent state. v_avg is the running mean of the inner
// iterates after each update; the k-th update uses step step_c / sqrt(k).
struct SgdState {
  Vec v_inner;
  Vec v_avg;
  long k = 0;
};

SgdState make_sgd_state(Index atoms);

// One sample update at x. Returns the state for chaining.
SgdState& sgd_step(SgdState& state, Eigen::Ref<const Vec> x, const DiscreteMeasure& nu,
                   const CostFunction& c, Epsilon eps, double step_c);

struct SgdResult {
  Vec v_avg;    // centered (the iterates are translation-free by construction)
  Vec v_inner;
  ConvergenceTrace trace;
};

// Runs cfg.max_passes sample updates against draws from mu. Checkpoints lie
// on a geometric grid of iteration counts. When v_ref is given, checkpoints
// log ||v_avg - v_ref||_2 / ||v_ref||_2; the objective column always holds a
// Monte-Carlo estimate of the semi-dual value on a held-out batch.
// cfg.step_c <= 0 selects the documented default C = eps.
SgdResult sgd_solve(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                    const CostFunction& c, Epsilon eps, const SolveConfig& cfg,
                    SeededRng& rng, const Vec* v_ref = nullptr);

// Draws an N-sample empirical surrogate of mu and runs the average-gradient
// solver on the resulting finite problem; the trace is rewritten to the
// stochastic convention (pass column = sample-gradient evaluations, distance
// column relative to v_ref). The plateau of that distance exposes the
// discretization bias of the surrogate.
SgdResult sag_on_samples(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                         const CostFunction& c, Epsilon eps, Index n_samples,
                         const SolveConfig& cfg, SeededRng& rng, const Vec* v_ref = nullptr);

// Frozen high-accuracy potential for a semi-discrete instance: averaged
// ascent, 1e7 iterations, seed 0, constant base step 1. Deterministic in its
// inputs; used as the comparison target by the benchmarks.
Vec semidiscrete_reference(const ContinuousSampler& mu, const DiscreteMeasure& nu,
                           const CostFunction& c, Epsilon eps, long iterations = 10000000,
                           double step_c = 1.0, std::uint64_t seed = 0);

// Monte-Carlo estimate of the semi-dual objective at v over n draws from mu.
double mc_semidual_objective(Eigen::Ref<const Vec> v, const ContinuousSampler& mu,
                             const DiscreteMeasure& nu, const CostFunction& c, Epsilon eps,
                             Index n, SeededRng& rng);

}  // namespace stochot
