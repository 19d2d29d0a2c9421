#include "stochot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stochot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Max-shifted log sum exp over finite-or-minus-infinity terms.
double lse(const Vec& t) {
  double m = t.maxCoeff();
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (Index i = 0; i < t.size(); ++i) s += std::exp(t[i] - m);
  return m + std::log(s);
}

double h0_value(const Vec& v, const Vec& mu, const Vec& nu, const Mat& cost) {
  double val = nu.dot(v);
  for (Index i = 0; i < cost.rows(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    double best = kInf;
    for (Index j = 0; j < cost.cols(); ++j) {
      if (!(nu[j] > 0.0)) continue;
      best = std::min(best, cost(i, j) - v[j]);
    }
    val += mu[i] * best;
  }
  return val;
}

Vec h0_subgrad(const Vec& v, const Vec& mu, const Vec& nu, const Mat& cost) {
  Vec g = nu;
  for (Index i = 0; i < cost.rows(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    Index best = -1;
    double best_val = kInf;
    for (Index j = 0; j < cost.cols(); ++j) {
      if (!(nu[j] > 0.0)) continue;
      double r = cost(i, j) - v[j];
      if (best < 0 || r < best_val) {
        best = j;
        best_val = r;
      }
    }
    g[best] -= mu[i];
  }
  return g;
}

}  // namespace

double exact_ot_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("exact_ot_1d: measures must live on the line");
  if (!(p >= 1.0)) throw std::invalid_argument("exact_ot_1d: exponent must be >= 1");

  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<Index> idx(static_cast<std::size_t>(m.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return m.atoms()(0, a) < m.atoms()(0, b); });
    return idx;
  };
  std::vector<Index> ia = sorted(mu), ib = sorted(nu);

  double total = 0.0;
  std::size_t a = 0, b = 0;
  double ra = mu.weights()[ia[0]];
  double rb = nu.weights()[ib[0]];
  while (a < ia.size() && b < ib.size()) {
    double m = std::min(ra, rb);
    if (m > 0.0) {
      double d = std::abs(mu.atoms()(0, ia[a]) - nu.atoms()(0, ib[b]));
      total += m * std::pow(d, p);
    }
    ra -= m;
    rb -= m;
    if (ra <= 1e-15) {
      ++a;
      if (a < ia.size()) ra = mu.weights()[ia[a]];
    }
    if (rb <= 1e-15) {
      ++b;
      if (b < ib.size()) rb = nu.weights()[ib[b]];
    }
  }
  return total;
}

double brute_force_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost) {
  Index n = mu.size();
  if (nu.size() != n) throw std::invalid_argument("brute_force_ot: marginals differ in size");
  if (n > 7) throw std::invalid_argument("brute_force_ot: more than 7 atoms");
  double w = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(mu.weights()[i] - w) > 1e-9 || std::abs(nu.weights()[i] - w) > 1e-9)
      throw std::invalid_argument("brute_force_ot: weights must be uniform");
  }
  if (cost.rows() != n || cost.cols() != n)
    throw std::invalid_argument("brute_force_ot: cost matrix size mismatch");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = kInf;
  do {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best * w;
}

ReferenceSolution reference_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const Mat& cost, Epsilon eps, double tol, long sweep_cap) {
  if (!eps.regularized())
    throw std::invalid_argument("reference_solve: eps must be positive");
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw std::invalid_argument("reference_solve: cost matrix size mismatch");
  double e = eps.value();
  Index ni = mu.size(), nj = nu.size();
  Vec logmu(ni), lognu(nj);
  for (Index i = 0; i < ni; ++i) logmu[i] = mu.weights()[i] > 0.0 ? std::log(mu.weights()[i]) : -kInf;
  for (Index j = 0; j < nj; ++j) lognu[j] = nu.weights()[j] > 0.0 ? std::log(nu.weights()[j]) : -kInf;

  Vec f = Vec::Zero(ni), g = Vec::Zero(nj);
  Vec ti(ni), tj(nj);
  double resid = kInf;
  long sweep = 0;
  for (; sweep < sweep_cap; ++sweep) {
    for (Index i = 0; i < ni; ++i) {
      if (logmu[i] == -kInf) {
        f[i] = 0.0;
        continue;
      }
      for (Index j = 0; j < nj; ++j) tj[j] = (g[j] - cost(i, j)) / e + lognu[j];
      f[i] = -e * lse(tj);
    }
    // Rows of the implied plan are exact after the f sweep; the residual is
    // the remaining column-marginal error.
    resid = 0.0;
    for (Index j = 0; j < nj; ++j) {
      if (lognu[j] == -kInf) continue;
      for (Index i = 0; i < ni; ++i) ti[i] = (f[i] - cost(i, j)) / e + logmu[i];
      double colsum = std::exp(lse(ti) + g[j] / e + lognu[j]);
      resid += std::abs(colsum - nu.weights()[j]);
    }
    if (resid <= tol) break;
    for (Index j = 0; j < nj; ++j) {
      if (lognu[j] == -kInf) {
        g[j] = 0.0;
        continue;
      }
      for (Index i = 0; i < ni; ++i) ti[i] = (f[i] - cost(i, j)) / e + logmu[i];
      g[j] = -e * lse(ti);
    }
  }
  if (resid > tol)
    throw NumericalError("reference_solve: residual " + std::to_string(resid) + " after " +
                         std::to_string(sweep_cap) + " sweeps; instance is ill-conditioned");

  ReferenceSolution out;
  double shift = g.mean();
  out.v_star = g.array() - shift;
  out.u_star = f.array() + shift;
  out.eps = e;
  out.grad_l1 = resid;
  out.sweeps = sweep + 1;
  out.objective = nu.weights().dot(g) + mu.weights().dot(f) - e;
  return out;
}

EpsConvergenceReport eps_convergence_check(const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu, const Mat& cost,
                                           const std::vector<double>& eps_grid,
                                           long polish_steps, double polish_step_c) {
  if (eps_grid.empty())
    throw std::invalid_argument("eps_convergence_check: empty eps grid");
  EpsConvergenceReport report;
  report.eps_grid = eps_grid;

  std::vector<Vec> solutions;
  solutions.reserve(eps_grid.size());
  // Tiny instances at the small end of the grid can need tens of millions of
  // sweeps; the per-sweep cost there is negligible, so the cap is raised.
  for (double e : eps_grid) {
    ReferenceSolution ref = reference_solve(mu, nu, cost, Epsilon(e), 1e-12, 50000000);
    report.linf_norms.push_back(ref.v_star.cwiseAbs().maxCoeff());
    report.objectives.push_back(ref.objective);
    solutions.push_back(ref.v_star);
  }

  // Estimate the unregularized maximizer: warm-start at the smallest-eps
  // solution, run averaged subgradient ascent on the eps = 0 objective.
  std::size_t smallest =
      static_cast<std::size_t>(std::min_element(eps_grid.begin(), eps_grid.end()) -
                               eps_grid.begin());
  Vec v = solutions[smallest];
  Vec avg = v;
  for (long k = 1; k <= polish_steps; ++k) {
    Vec g = h0_subgrad(v, mu.weights(), nu.weights(), cost);
    v += (polish_step_c / std::sqrt(static_cast<double>(k))) * g;
    double kk = static_cast<double>(k);
    avg = (1.0 / kk) * v + ((kk - 1.0) / kk) * avg;
  }
  report.v_limit = avg.array() - avg.mean();
  report.v_limit_objective = h0_value(report.v_limit, mu.weights(), nu.weights(), cost);

  for (const Vec& s : solutions)
    report.dist_to_limit.push_back((s - report.v_limit).norm());
  return report;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& objective, const Vec& v,
                     double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vec g(v.size());
  Vec probe = v;
  for (Index j = 0; j < v.size(); ++j) {
    probe[j] = v[j] + h;
    double up = objective(probe);
    probe[j] = v[j] - h;
    double down = objective(probe);
    probe[j] = v[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace stochot
