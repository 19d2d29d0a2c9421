#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/solvers_discrete.hpp"
#include "stochot/trace.hpp"
#include "stochot/types.hpp"

namespace stochot {

// kappa(x, x') = exp(-||x - x'||^2 / sigma^2); kappa(x, x) = 1.
struct GaussianKernel {
  double sigma = 1.0;
  double operator()(Eigen::Ref<const Vec> a, Eigen::Ref<const Vec> b) const;
};

// Bandwidth heuristic: median pairwise distance of a pilot draw.
double median_pairwise_distance(const ContinuousSampler& s, SeededRng& rng,
                                Index pilot = 512);

// Shared expansion of the two potentials: u = sum_i alpha_i kappa(., x_i),
// v = sum_i alpha_i ell(., y_i). Entries are append-only and never mutated.
class KernelExpansion {
 public:
  KernelExpansion(GaussianKernel kernel_x, GaussianKernel kernel_y, int dim_x, int dim_y,
                  double step_c, double radius_r, Epsilon eps,
                  bool drop_negligible = false);

  double eval_u(Eigen::Ref<const Vec> x) const;
  double eval_v(Eigen::Ref<const Vec> y) const;

  // Appends entry k with weight alpha_k = clamp((C/sqrt(k)) (1 - e^z)),
  // z = (u_{k-1}(x) + v_{k-1}(y) - c_xy) / eps, clamped to radius_r times
  // the base step. Throws NumericalError when z exceeds 700.
  void step(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y, double c_xy);

  Index size() const { return static_cast<Index>(alphas_.size()); }
  long steps_taken() const { return steps_; }
  double alpha(Index i) const { return alphas_[static_cast<std::size_t>(i)]; }
  long step_of_entry(Index i) const { return step_of_entry_[static_cast<std::size_t>(i)]; }
  Eigen::Map<const Mat> xs() const;
  Eigen::Map<const Mat> ys() const;
  const GaussianKernel& kernel_x() const { return kernel_x_; }
  const GaussianKernel& kernel_y() const { return kernel_y_; }
  double step_c() const { return step_c_; }
  double radius_r() const { return radius_r_; }
  Epsilon eps() const { return eps_; }
  std::uint64_t kernel_eval_count() const { return kernel_evals_; }

 private:
  GaussianKernel kernel_x_, kernel_y_;
  int dim_x_, dim_y_;
  double step_c_, radius_r_;
  Epsilon eps_;
  bool drop_negligible_;
  long steps_ = 0;
  std::vector<double> alphas_;
  std::vector<long> step_of_entry_;
  std::vector<double> xs_flat_, ys_flat_;  // column-appended d x k storage
  mutable std::uint64_t kernel_evals_ = 0;
};

// Smoothed dual integrand f_eps at a sample pair, given the potential values.
double dual_integrand(double u_val, double v_val, double c_val, Epsilon eps);

struct KernelSgdResult {
  KernelExpansion expansion;
  ConvergenceTrace trace;
};

// Potential evaluated against the trace: relative l2 error of u on a fixed
// evaluation sample drawn from mu (so high-mass regions dominate the norm),
// versus the supplied proxy, both centered over the sample first. The
// objective column holds a Monte-Carlo estimate of the smoothed dual on a
// held-out pair batch. cfg.max_passes is the iteration budget.
KernelSgdResult kernel_sgd_solve(const ContinuousSampler& mu, const ContinuousSampler& nu,
                                 const CostFunction& c, GaussianKernel kernel_x,
                                 GaussianKernel kernel_y, Epsilon eps,
                                 const SolveConfig& cfg, SeededRng& rng,
                                 const std::function<double(const Vec&)>* proxy_u = nullptr,
                                 Index n_eval = 512);

// Expansion checkpoint format: k,alpha,x...,y... with coordinates flattened.
void write_expansion_csv(const std::string& path, const KernelExpansion& e);

}  // namespace stochot
