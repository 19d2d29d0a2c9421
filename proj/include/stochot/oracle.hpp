#pragma once

#include <functional>
#include <vector>

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/types.hpp"

// Exact and high-accuracy references the solver tests are judged against.
// The iterative pieces here keep their own arithmetic instead of calling
// into the solver modules, so agreement between the two is evidence rather
// than tautology.
namespace stochot {

// Unregularized transport cost between one-dimensional discrete measures
// under c(x, y) = |x - y|^p, by the sorted quantile coupling.
double exact_ot_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

// Unregularized cost for equal-size uniform marginals by enumerating all
// assignments. Requires I = J <= 7 and uniform weights.
double brute_force_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost);

struct ReferenceSolution {
  Vec v_star;       // centered
  Vec u_star;
  double objective = 0.0;
  double eps = 0.0;
  double grad_l1 = 0.0;  // achieved first-order residual
  long sweeps = 0;
};

// Log-domain alternating maximization run to a first-order residual of tol
// (sum of absolute marginal errors of the implied plan). Throws
// NumericalError after sweep_cap sweeps.
ReferenceSolution reference_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const Mat& cost, Epsilon eps, double tol = 1e-12,
                                  long sweep_cap = 1000000);

struct EpsConvergenceReport {
  std::vector<double> eps_grid;          // as given
  std::vector<double> dist_to_limit;     // ||v*_eps - v*_0||_2, centered
  std::vector<double> linf_norms;        // ||v*_eps||_inf
  std::vector<double> objectives;        // regularized optima
  Vec v_limit;                           // estimated unregularized maximizer
  double v_limit_objective = 0.0;        // its eps = 0 semi-dual value
};

// Solves the regularized problem over a decreasing eps grid and polishes the
// smallest-eps solution with averaged subgradient ascent to estimate the
// unregularized limit.
EpsConvergenceReport eps_convergence_check(const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu, const Mat& cost,
                                           const std::vector<double>& eps_grid,
                                           long polish_steps = 200000,
                                           double polish_step_c = 1.0);

// Central differences, one coordinate at a time.
Vec finite_diff_grad(const std::function<double(const Vec&)>& objective, const Vec& v,
                     double h = 1e-6);

}  // namespace stochot
