#pragma once

#include <cstdint>

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/trace.hpp"
#include "stochot/types.hpp"

namespace stochot {

enum class StepMode { Constant, OverSqrtK };

// Shared solver knobs. step_c <= 0 asks each solver for its documented
// default stepsize. max_passes counts full sweeps for the discrete solvers
// and total sample draws for the stochastic ones.
struct SolveConfig {
  Epsilon eps{1e-2};
  double step_c = 0.0;
  StepMode step_mode = StepMode::Constant;
  long max_passes = 100;
  Index minibatch = 1;
  double tol_grad_l1 = 0.0;  // 0 runs the full pass budget
  std::uint64_t seed = 0;
  long checkpoint_every = 1;
  bool record_iterates = false;
  double radius_r = 1e4;  // clamp radius for the kernel scheme, in base steps
};

struct DualPotentials {
  Vec u;
  Vec v;
};

struct SolveResult {
  DualPotentials potentials;  // v centered, u compensated to keep u_i + v_j
  ConvergenceTrace trace;
  double final_grad_l1 = 0.0;
  double final_objective = 0.0;
};

// Gradient smoothness bound of one sampled term. A term aggregates a
// minibatch of points, so its weight is at most minibatch * max_i mu_i and
// the bound is minibatch * max_i mu_i / eps.
double lipschitz_bound(const DiscreteMeasure& mu, Epsilon eps, Index minibatch = 1);

// l1 norm of the full semi-dual gradient at v.
double grad_l1_full(Eigen::Ref<const Vec> v, const DiscreteMeasure& mu,
                    const DiscreteMeasure& nu, const CostMatrix& cost, Epsilon eps);

// Log-domain block ascent: alternate exact conjugations of u and v. One
// sweep updates both blocks; tolerance is checked at checkpoints.
// dist_ref, when given, is a centered reference potential; checkpoints then
// log the l2 distance of the centered iterate to it.
SolveResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const CostMatrix& cost, const SolveConfig& cfg,
                     const Vec* dist_ref = nullptr);

// Stochastic average-gradient ascent on the sampled semi-dual. Keeps one
// stored gradient per minibatch block and steps along their running sum.
// Blocks are fixed contiguous slices of one seeded shuffle of the sample
// indices. A pass is I sample-gradient evaluations. Defaults: constant step
// 3/L when step_c <= 0.
SolveResult sag_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const CostMatrix& cost, const SolveConfig& cfg,
                      const Vec* dist_ref = nullptr);

}  // namespace stochot
