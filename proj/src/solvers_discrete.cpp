#include "stochot/solvers_discrete.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "stochot/rng.hpp"
#include "stochot/semidual.hpp"

namespace stochot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Objective and gradient of the semi-dual at v, iterating rows through the
// transposed entries for contiguous access.
SemidualEval eval_semidual(const Vec& v, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostMatrix& cost, Epsilon eps, Vec& r, Vec& chi) {
  SemidualEval out;
  out.grad = nu.weights();
  out.value = 0.0;
  for (Index i = 0; i < cost.rows(); ++i) {
    double mi = mu.weights()[i];
    if (!(mi > 0.0)) continue;
    r = cost.entries_t.col(i) - v;
    out.value += mi * softmin_and_chi(r, nu.weights(), eps, chi);
    out.grad.noalias() -= mi * chi;
  }
  out.value += nu.weights().dot(v);
  if (eps.regularized()) out.value -= eps.value();
  return out;
}

void kahan_add(Vec& sum, Vec& comp, const Vec& delta) {
  for (Index j = 0; j < sum.size(); ++j) {
    double y = delta[j] - comp[j];
    double t = sum[j] + y;
    comp[j] = (t - sum[j]) - y;
    sum[j] = t;
  }
}

void check_instance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                    const CostMatrix& cost) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw std::invalid_argument("solver: cost matrix does not match the marginals");
}

}  // namespace

double lipschitz_bound(const DiscreteMeasure& mu, Epsilon eps, Index minibatch) {
  if (!eps.regularized())
    throw std::invalid_argument("lipschitz_bound: eps must be positive");
  if (minibatch < 1)
    throw std::invalid_argument("lipschitz_bound: minibatch must be positive");
  return static_cast<double>(minibatch) * mu.weights().maxCoeff() / eps.value();
}

double grad_l1_full(Eigen::Ref<const Vec> v, const DiscreteMeasure& mu,
                    const DiscreteMeasure& nu, const CostMatrix& cost, Epsilon eps) {
  check_instance(mu, nu, cost);
  Vec r(cost.cols()), chi(cost.cols());
  Vec vv = v;
  return eval_semidual(vv, mu, nu, cost, eps, r, chi).grad.lpNorm<1>();
}

SolveResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const CostMatrix& cost, const SolveConfig& cfg, const Vec* dist_ref) {
  check_instance(mu, nu, cost);
  if (!cfg.eps.regularized())
    throw std::invalid_argument("sinkhorn: eps must be positive");
  if (cfg.checkpoint_every < 1)
    throw std::invalid_argument("sinkhorn: checkpoint_every must be >= 1");

  Index ni = cost.rows(), nj = cost.cols();
  Vec u = Vec::Zero(ni), v = Vec::Zero(nj);
  Vec r(std::max(ni, nj)), chi(nj), rj(nj), ri(ni);

  SolveResult result;
  double elapsed_ms = 0.0;
  auto checkpoint = [&](double pass) {
    SemidualEval ev = eval_semidual(v, mu, nu, cost, cfg.eps, rj, chi);
    TraceCheckpoint cp;
    cp.pass = pass;
    cp.grad_l1 = ev.grad.lpNorm<1>();
    cp.objective = ev.value;
    cp.wallclock_ms = elapsed_ms;
    if (dist_ref) cp.dist_ref_l2 = (centered(v) - *dist_ref).norm();
    if (cfg.record_iterates) result.trace.iterates.push_back(centered(v));
    result.trace.append(std::move(cp));
    result.final_grad_l1 = *result.trace.back().grad_l1;
    result.final_objective = ev.value;
  };

  long sweep = 0;
  for (; sweep < cfg.max_passes; ++sweep) {
    auto t0 = Clock::now();
    for (Index i = 0; i < ni; ++i) {
      r.head(nj) = cost.entries_t.col(i) - v;
      u[i] = softmin(r.head(nj), nu.weights(), cfg.eps);
    }
    for (Index j = 0; j < nj; ++j) {
      r.head(ni) = cost.entries.col(j) - u;
      v[j] = softmin(r.head(ni), mu.weights(), cfg.eps);
    }
    elapsed_ms += ms_between(t0, Clock::now());
    if ((sweep + 1) % cfg.checkpoint_every == 0) {
      checkpoint(static_cast<double>(sweep + 1));
      if (cfg.tol_grad_l1 > 0.0 && result.final_grad_l1 <= cfg.tol_grad_l1) {
        ++sweep;
        break;
      }
    }
  }
  if (result.trace.empty() || result.trace.back().pass < static_cast<double>(sweep))
    checkpoint(static_cast<double>(sweep));

  double shift = v.mean();
  result.potentials.v = v.array() - shift;
  result.potentials.u = u.array() + shift;
  return result;
}

SolveResult sag_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const CostMatrix& cost, const SolveConfig& cfg, const Vec* dist_ref) {
  check_instance(mu, nu, cost);
  if (!cfg.eps.regularized())
    throw std::invalid_argument("sag_solve: eps must be positive");
  Index ni = cost.rows(), nj = cost.cols();
  if (cfg.minibatch < 1 || cfg.minibatch > ni)
    throw std::invalid_argument("sag_solve: minibatch must be in [1, I]");
  if (cfg.checkpoint_every < 1)
    throw std::invalid_argument("sag_solve: checkpoint_every must be >= 1");
  double step_c = cfg.step_c;
  if (step_c <= 0.0) step_c = 3.0 / lipschitz_bound(mu, cfg.eps, cfg.minibatch);

  SeededRng rng(cfg.seed);
  std::vector<Index> perm(static_cast<std::size_t>(ni));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (std::size_t i = perm.size() - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
  Index blocks = (ni + cfg.minibatch - 1) / cfg.minibatch;

  Vec v = Vec::Zero(nj);
  Mat stored = Mat::Zero(nj, blocks);  // one summed gradient per block
  Vec direction = Vec::Zero(nj);       // running sum of stored columns
  Vec comp = Vec::Zero(nj);            // Kahan compensation for direction
  Vec gnew(nj), delta(nj), r(nj), chi(nj);

  SolveResult result;
  double elapsed_ms = 0.0;
  long evals = 0;
  auto checkpoint = [&]() {
    SemidualEval ev = eval_semidual(v, mu, nu, cost, cfg.eps, r, chi);
    TraceCheckpoint cp;
    cp.pass = static_cast<double>(evals) / static_cast<double>(ni);
    cp.grad_l1 = ev.grad.lpNorm<1>();
    cp.objective = ev.value;
    cp.wallclock_ms = elapsed_ms;
    if (dist_ref) cp.dist_ref_l2 = (centered(v) - *dist_ref).norm();
    if (cfg.record_iterates) result.trace.iterates.push_back(centered(v));
    result.trace.append(std::move(cp));
    result.final_grad_l1 = *result.trace.back().grad_l1;
    result.final_objective = ev.value;
  };

  const long max_evals = cfg.max_passes * static_cast<long>(ni);
  long next_cp = cfg.checkpoint_every * static_cast<long>(ni);
  long step_count = 0;
  bool done = false;
  while (evals < max_evals && !done) {
    auto t0 = Clock::now();
    Index blk = static_cast<Index>(rng.uniform_below(static_cast<std::size_t>(blocks)));
    Index lo = blk * cfg.minibatch;
    Index hi = std::min(lo + cfg.minibatch, ni);
    gnew.setZero();
    for (Index s = lo; s < hi; ++s) {
      Index i = perm[static_cast<std::size_t>(s)];
      double mi = mu.weights()[i];
      r = cost.entries_t.col(i) - v;
      softmin_and_chi(r, nu.weights(), cfg.eps, chi);
      gnew.noalias() += mi * (nu.weights() - chi);
    }
    delta = gnew - stored.col(blk);
    kahan_add(direction, comp, delta);
    stored.col(blk) = gnew;
    ++step_count;
    double step = cfg.step_mode == StepMode::OverSqrtK
                      ? step_c / std::sqrt(static_cast<double>(step_count))
                      : step_c;
    v.noalias() += step * direction;
    evals += hi - lo;
    elapsed_ms += ms_between(t0, Clock::now());
    if (evals >= next_cp) {
      checkpoint();
      next_cp += cfg.checkpoint_every * static_cast<long>(ni);
      if (cfg.tol_grad_l1 > 0.0 && result.final_grad_l1 <= cfg.tol_grad_l1) done = true;
    }
  }
  double final_pass = static_cast<double>(evals) / static_cast<double>(ni);
  if (result.trace.empty() || result.trace.back().pass < final_pass) checkpoint();

  result.potentials.v = centered(v);
  result.potentials.u =
      smoothed_ctransform(result.potentials.v, nu.weights(), cost.entries, cfg.eps);
  return result;
}

}  // namespace stochot
