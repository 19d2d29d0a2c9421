#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/types.hpp"

// Smoothed conjugation toolkit. Everything here is a free function on Eigen
// expressions, templated on the scalar type; atoms with zero weight are
// excluded from every minimum, exponential and argmin. All exponentials are
// evaluated after subtracting the support minimum, so values stay finite for
// any eps > 0 and any finite cost range.
namespace stochot {

namespace detail {

template <typename DR, typename DN>
void check_pair(const Eigen::MatrixBase<DR>& r, const Eigen::MatrixBase<DN>& nu) {
  if (r.size() == 0) throw std::invalid_argument("softmin: empty vector");
  if (r.size() != nu.size())
    throw std::invalid_argument("softmin: value and weight lengths differ");
}

// Index of the smallest r_j with nu_j > 0, lowest index on ties.
template <typename DR, typename DN>
Index support_argmin(const Eigen::MatrixBase<DR>& r, const Eigen::MatrixBase<DN>& nu) {
  using Scalar = typename DR::Scalar;
  Index best = -1;
  Scalar best_val = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < r.size(); ++j) {
    if (!(nu.coeff(j) > Scalar(0))) continue;
    Scalar rj = r.coeff(j);
    if (best < 0 || rj < best_val) {
      best = j;
      best_val = rj;
    }
  }
  if (best < 0) throw std::invalid_argument("softmin: no atom has positive weight");
  return best;
}

}  // namespace detail

// -eps * log sum_j exp(-r_j / eps) nu_j, the hard minimum over the support
// when eps = 0.
template <typename DR, typename DN>
typename DR::Scalar softmin(const Eigen::MatrixBase<DR>& r, const Eigen::MatrixBase<DN>& nu,
                            Epsilon eps) {
  using Scalar = typename DR::Scalar;
  detail::check_pair(r, nu);
  Index jstar = detail::support_argmin(r, nu);
  Scalar m = r.coeff(jstar);
  if (!eps.regularized()) return m;
  Scalar e = static_cast<Scalar>(eps.value());
  Scalar s = Scalar(0);
  for (Index j = 0; j < r.size(); ++j) {
    Scalar w = nu.coeff(j);
    if (w > Scalar(0)) s += std::exp(-(r.coeff(j) - m) / e) * w;
  }
  return m - e * std::log(s);
}

// Gibbs weights chi over the support: chi_j = exp(-r_j/eps) nu_j normalized
// to total mass one. At eps = 0 this is the unit vector at the support
// argmin (lowest index on ties).
template <typename DR, typename DN>
VecX<typename DR::Scalar> chi_weights(const Eigen::MatrixBase<DR>& r,
                                      const Eigen::MatrixBase<DN>& nu, Epsilon eps) {
  using Scalar = typename DR::Scalar;
  detail::check_pair(r, nu);
  VecX<Scalar> chi = VecX<Scalar>::Zero(r.size());
  Index jstar = detail::support_argmin(r, nu);
  if (!eps.regularized()) {
    chi[jstar] = Scalar(1);
    return chi;
  }
  Scalar m = r.coeff(jstar);
  Scalar e = static_cast<Scalar>(eps.value());
  Scalar s = Scalar(0);
  for (Index j = 0; j < r.size(); ++j) {
    Scalar w = nu.coeff(j);
    if (w > Scalar(0)) {
      chi[j] = std::exp(-(r.coeff(j) - m) / e) * w;
      s += chi[j];
    }
  }
  chi /= s;
  return chi;
}

// One-pass softmin + Gibbs weights for solver inner loops.
template <typename DR, typename DN>
typename DR::Scalar softmin_and_chi(const Eigen::MatrixBase<DR>& r,
                                    const Eigen::MatrixBase<DN>& nu, Epsilon eps,
                                    VecX<typename DR::Scalar>& chi_out) {
  using Scalar = typename DR::Scalar;
  detail::check_pair(r, nu);
  chi_out.setZero(r.size());
  Index jstar = detail::support_argmin(r, nu);
  Scalar m = r.coeff(jstar);
  if (!eps.regularized()) {
    chi_out[jstar] = Scalar(1);
    return m;
  }
  Scalar e = static_cast<Scalar>(eps.value());
  Scalar s = Scalar(0);
  for (Index j = 0; j < r.size(); ++j) {
    Scalar w = nu.coeff(j);
    if (w > Scalar(0)) {
      chi_out[j] = std::exp(-(r.coeff(j) - m) / e) * w;
      s += chi_out[j];
    }
  }
  chi_out /= s;
  return m - e * std::log(s);
}

// Per-sample semi-dual term: sum_j v_j nu_j plus the softmin of the
// v-adjusted costs, minus eps when eps > 0.
inline double barh(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> v,
                   const DiscreteMeasure& nu, const CostFunction& c, Epsilon eps) {
  if (v.size() != nu.size())
    throw std::invalid_argument("barh: potential length does not match atom count");
  Vec r(nu.size());
  for (Index j = 0; j < nu.size(); ++j) r[j] = c(x, nu.atom(j)) - v[j];
  double base = nu.weights().dot(v) + softmin(r, nu.weights(), eps);
  return eps.regularized() ? base - eps.value() : base;
}

// Gradient (subgradient at eps = 0) of barh in v: nu - chi.
inline Vec grad_barh(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> v,
                     const DiscreteMeasure& nu, const CostFunction& c, Epsilon eps) {
  if (v.size() != nu.size())
    throw std::invalid_argument("grad_barh: potential length does not match atom count");
  Vec r(nu.size());
  for (Index j = 0; j < nu.size(); ++j) r[j] = c(x, nu.atom(j)) - v[j];
  return nu.weights() - chi_weights(r, nu.weights(), eps);
}

struct SemidualEval {
  Vec grad;
  double value = 0.0;
};

// Full objective and gradient of the discrete semi-dual at v, one softmin
// pass per row of C.
template <typename DV, typename DM, typename DN>
SemidualEval semidual_grad_and_value(const Eigen::MatrixBase<DV>& v,
                                     const Eigen::MatrixBase<DM>& mu,
                                     const Eigen::MatrixBase<DN>& nu, const Mat& cost,
                                     Epsilon eps) {
  if (v.size() != cost.cols() || nu.size() != cost.cols() || mu.size() != cost.rows())
    throw std::invalid_argument("semidual_grad_and_value: size mismatch");
  SemidualEval out;
  out.grad = nu;
  out.value = 0.0;
  Vec chi(cost.cols());
  Vec r(cost.cols());
  for (Index i = 0; i < cost.rows(); ++i) {
    double mi = mu.coeff(i);
    if (!(mi > 0.0)) continue;
    r = cost.row(i).transpose() - v;
    double s = softmin_and_chi(r, nu, eps, chi);
    out.value += mi * s;
    out.grad.noalias() -= mi * chi;
  }
  double vdotnu = 0.0;
  for (Index j = 0; j < v.size(); ++j) vdotnu += v.coeff(j) * nu.coeff(j);
  out.value += vdotnu;
  if (eps.regularized()) out.value -= eps.value();
  return out;
}

template <typename DV, typename DM, typename DN>
double semidual_objective(const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DM>& mu,
                          const Eigen::MatrixBase<DN>& nu, const Mat& cost, Epsilon eps) {
  return semidual_grad_and_value(v, mu, nu, cost, eps).value;
}

// Smoothed c-transform of v: u_i = softmin_j (C_ij - v_j) under nu.
template <typename DV, typename DN>
Vec smoothed_ctransform(const Eigen::MatrixBase<DV>& v, const Eigen::MatrixBase<DN>& nu,
                        const Mat& cost, Epsilon eps) {
  if (v.size() != cost.cols() || nu.size() != cost.cols())
    throw std::invalid_argument("smoothed_ctransform: size mismatch");
  Vec u(cost.rows());
  for (Index i = 0; i < cost.rows(); ++i)
    u[i] = softmin(cost.row(i).transpose() - v, nu, eps);
  return u;
}

// Both-sided smoothed dual objective; requires eps > 0 (the constraint
// indicator has no expectation form at eps = 0).
template <typename DU, typename DV, typename DM, typename DN>
double dual_objective(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v,
                      const Eigen::MatrixBase<DM>& mu, const Eigen::MatrixBase<DN>& nu,
                      const Mat& cost, Epsilon eps) {
  if (!eps.regularized())
    throw std::invalid_argument("dual_objective: eps must be positive");
  if (u.size() != cost.rows() || v.size() != cost.cols() || mu.size() != cost.rows() ||
      nu.size() != cost.cols())
    throw std::invalid_argument("dual_objective: size mismatch");
  double e = eps.value();
  double penalty = 0.0;
  for (Index i = 0; i < cost.rows(); ++i) {
    double mi = mu.coeff(i);
    if (!(mi > 0.0)) continue;
    // log-sum-exp of (u_i + v_j - C_ij)/eps + log nu_j over the support
    double m = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < cost.cols(); ++j) {
      if (!(nu.coeff(j) > 0.0)) continue;
      m = std::max(m, (u.coeff(i) + v.coeff(j) - cost(i, j)) / e);
    }
    double s = 0.0;
    for (Index j = 0; j < cost.cols(); ++j) {
      double nj = nu.coeff(j);
      if (!(nj > 0.0)) continue;
      s += std::exp((u.coeff(i) + v.coeff(j) - cost(i, j)) / e - m) * nj;
    }
    penalty += mi * std::exp(m + std::log(s));
  }
  double udotmu = 0.0;
  for (Index i = 0; i < u.size(); ++i) udotmu += u.coeff(i) * mu.coeff(i);
  double vdotnu = 0.0;
  for (Index j = 0; j < v.size(); ++j) vdotnu += v.coeff(j) * nu.coeff(j);
  return udotmu + vdotnu - e * penalty;
}

// Primal coupling exp((u_i + v_j - C_ij)/eps) mu_i nu_j, exponent evaluated
// row-wise in log domain. Rows with mu_i = 0 or columns with nu_j = 0 are
// identically zero.
template <typename DU, typename DV, typename DM, typename DN>
TransportPlan recover_plan(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v,
                           const Eigen::MatrixBase<DM>& mu, const Eigen::MatrixBase<DN>& nu,
                           const Mat& cost, Epsilon eps) {
  if (!eps.regularized())
    throw std::invalid_argument("recover_plan: eps must be positive");
  if (u.size() != cost.rows() || v.size() != cost.cols() || mu.size() != cost.rows() ||
      nu.size() != cost.cols())
    throw std::invalid_argument("recover_plan: size mismatch");
  double e = eps.value();
  TransportPlan plan = TransportPlan::Zero(cost.rows(), cost.cols());
  for (Index i = 0; i < cost.rows(); ++i) {
    double mi = mu.coeff(i);
    if (!(mi > 0.0)) continue;
    for (Index j = 0; j < cost.cols(); ++j) {
      double nj = nu.coeff(j);
      if (!(nj > 0.0)) continue;
      plan(i, j) = mi * nj * std::exp((u.coeff(i) + v.coeff(j) - cost(i, j)) / e);
    }
  }
  return plan;
}

template <typename DM, typename DN>
double marginal_violation(const TransportPlan& plan, const Eigen::MatrixBase<DM>& mu,
                          const Eigen::MatrixBase<DN>& nu) {
  if (plan.rows() != mu.size() || plan.cols() != nu.size())
    throw std::invalid_argument("marginal_violation: size mismatch");
  double viol = 0.0;
  for (Index i = 0; i < plan.rows(); ++i) viol += std::abs(plan.row(i).sum() - mu.coeff(i));
  for (Index j = 0; j < plan.cols(); ++j) viol += std::abs(plan.col(j).sum() - nu.coeff(j));
  return viol;
}

// KL(plan | mu (x) nu) with the mass-normalization term: integrand is
// (log d(plan)/d(mu (x) nu) - 1) d(plan). Mass outside the product support
// makes it +infinity; empty cells contribute zero.
template <typename DM, typename DN>
double kl_divergence(const TransportPlan& plan, const Eigen::MatrixBase<DM>& mu,
                     const Eigen::MatrixBase<DN>& nu) {
  if (plan.rows() != mu.size() || plan.cols() != nu.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0.0;
  for (Index i = 0; i < plan.rows(); ++i) {
    for (Index j = 0; j < plan.cols(); ++j) {
      double p = plan(i, j);
      if (p == 0.0) continue;
      if (p < 0.0) throw std::invalid_argument("kl_divergence: negative plan entry");
      double base = mu.coeff(i) * nu.coeff(j);
      if (base == 0.0) return std::numeric_limits<double>::infinity();
      kl += p * (std::log(p / base) - 1.0);
    }
  }
  return kl;
}

template <typename DM, typename DN>
double primal_value(const TransportPlan& plan, const Mat& cost, const Eigen::MatrixBase<DM>& mu,
                    const Eigen::MatrixBase<DN>& nu, Epsilon eps) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols())
    throw std::invalid_argument("primal_value: size mismatch");
  double transport = (plan.array() * cost.array()).sum();
  return transport + eps.value() * kl_divergence(plan, mu, nu);
}

// v minus its mean; the canonical representative of the translation class.
inline Vec centered(Eigen::Ref<const Vec> v) {
  return v.array() - v.mean();
}

}  // namespace stochot
