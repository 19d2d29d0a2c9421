#include "stochot/solver_continuous.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "stochot/io.hpp"

namespace stochot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

double GaussianKernel::operator()(Eigen::Ref<const Vec> a, Eigen::Ref<const Vec> b) const {
  if (a.size() != b.size())
    throw std::invalid_argument("GaussianKernel: dimension mismatch");
  return std::exp(-(a - b).squaredNorm() / (sigma * sigma));
}

double median_pairwise_distance(const ContinuousSampler& s, SeededRng& rng, Index pilot) {
  if (pilot < 2) throw std::invalid_argument("median_pairwise_distance: pilot too small");
  Mat pts(s.dim(), pilot);
  for (Index i = 0; i < pilot; ++i) pts.col(i) = s.draw(rng);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(pilot) * (pilot - 1) / 2);
  for (Index i = 0; i < pilot; ++i)
    for (Index j = i + 1; j < pilot; ++j) dists.push_back((pts.col(i) - pts.col(j)).norm());
  std::size_t mid = (dists.size() - 1) / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  return dists[mid];
}

KernelExpansion::KernelExpansion(GaussianKernel kernel_x, GaussianKernel kernel_y, int dim_x,
                                 int dim_y, double step_c, double radius_r, Epsilon eps,
                                 bool drop_negligible)
    : kernel_x_(kernel_x),
      kernel_y_(kernel_y),
      dim_x_(dim_x),
      dim_y_(dim_y),
      step_c_(step_c),
      radius_r_(radius_r),
      eps_(eps),
      drop_negligible_(drop_negligible) {
  if (dim_x_ <= 0 || dim_y_ <= 0)
    throw std::invalid_argument("KernelExpansion: dimensions must be positive");
  if (!(kernel_x_.sigma > 0.0) || !(kernel_y_.sigma > 0.0))
    throw std::invalid_argument("KernelExpansion: kernel bandwidths must be positive");
  if (!(step_c_ > 0.0)) throw std::invalid_argument("KernelExpansion: step_c must be positive");
  if (!(radius_r_ > 0.0))
    throw std::invalid_argument("KernelExpansion: radius_r must be positive");
  if (!eps_.regularized())
    throw std::invalid_argument("KernelExpansion: eps must be positive");
}

Eigen::Map<const Mat> KernelExpansion::xs() const {
  return Eigen::Map<const Mat>(xs_flat_.data(), dim_x_, size());
}

Eigen::Map<const Mat> KernelExpansion::ys() const {
  return Eigen::Map<const Mat>(ys_flat_.data(), dim_y_, size());
}

namespace {

double eval_expansion(const std::vector<double>& alphas, const std::vector<double>& flat,
                      int dim, Eigen::Ref<const Vec> p, double sigma) {
  Index k = static_cast<Index>(alphas.size());
  if (k == 0) return 0.0;
  Eigen::Map<const Mat> pts(flat.data(), dim, k);
  Eigen::Map<const Eigen::ArrayXd> a(alphas.data(), k);
  Eigen::ArrayXd d2 = (pts.colwise() - p).colwise().squaredNorm().transpose().array();
  return (a * (-d2 / (sigma * sigma)).exp()).sum();
}

}  // namespace

double KernelExpansion::eval_u(Eigen::Ref<const Vec> x) const {
  if (x.size() != dim_x_) throw std::invalid_argument("eval_u: wrong dimension");
  kernel_evals_ += static_cast<std::uint64_t>(size());
  return eval_expansion(alphas_, xs_flat_, dim_x_, x, kernel_x_.sigma);
}

double KernelExpansion::eval_v(Eigen::Ref<const Vec> y) const {
  if (y.size() != dim_y_) throw std::invalid_argument("eval_v: wrong dimension");
  kernel_evals_ += static_cast<std::uint64_t>(size());
  return eval_expansion(alphas_, ys_flat_, dim_y_, y, kernel_y_.sigma);
}

void KernelExpansion::step(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y, double c_xy) {
  if (x.size() != dim_x_ || y.size() != dim_y_)
    throw std::invalid_argument("KernelExpansion::step: wrong dimension");
  double u = eval_u(x);
  double v = eval_v(y);
  double z = (u + v - c_xy) / eps_.value();
  if (z > 700.0)
    throw NumericalError("KernelExpansion::step: exponent " + std::to_string(z) +
                         " overflows; eps is too small for this cost scale");
  long k = steps_ + 1;
  double base = step_c_ / std::sqrt(static_cast<double>(k));
  double alpha = base * (1.0 - std::exp(z));
  double bound = radius_r_ * base;
  if (alpha > bound) alpha = bound;
  if (alpha < -bound) alpha = -bound;
  steps_ = k;
  if (drop_negligible_ && std::abs(alpha) < 1e-12) return;
  alphas_.push_back(alpha);
  step_of_entry_.push_back(k);
  xs_flat_.insert(xs_flat_.end(), x.data(), x.data() + x.size());
  ys_flat_.insert(ys_flat_.end(), y.data(), y.data() + y.size());
}

double dual_integrand(double u_val, double v_val, double c_val, Epsilon eps) {
  if (!eps.regularized())
    throw std::invalid_argument("dual_integrand: eps must be positive");
  double z = (u_val + v_val - c_val) / eps.value();
  if (z > 700.0)
    throw NumericalError("dual_integrand: exponent " + std::to_string(z) + " overflows");
  return u_val + v_val - eps.value() * std::exp(z);
}

KernelSgdResult kernel_sgd_solve(const ContinuousSampler& mu, const ContinuousSampler& nu,
                                 const CostFunction& c, GaussianKernel kernel_x,
                                 GaussianKernel kernel_y, Epsilon eps,
                                 const SolveConfig& cfg, SeededRng& rng,
                                 const std::function<double(const Vec&)>* proxy_u,
                                 Index n_eval) {
  if (cfg.step_c <= 0.0)
    throw std::invalid_argument("kernel_sgd_solve: step_c must be positive");
  KernelSgdResult result{KernelExpansion(kernel_x, kernel_y, mu.dim(), nu.dim(), cfg.step_c,
                                         cfg.radius_r, eps),
                         {}};
  KernelExpansion& exp = result.expansion;

  // Fixed evaluation sample from mu; draws from mu weight the error norm.
  SeededRng eval_rng = rng.split(0xE7A1);
  Mat eval_pts(mu.dim(), n_eval);
  for (Index i = 0; i < n_eval; ++i) eval_pts.col(i) = mu.draw(eval_rng);
  // Potentials match the proxy only modulo an additive constant, so both
  // sides are centered over the evaluation sample before comparing.
  Vec proxy_vals;
  double proxy_norm = 0.0;
  if (proxy_u) {
    proxy_vals.resize(n_eval);
    for (Index i = 0; i < n_eval; ++i) proxy_vals[i] = (*proxy_u)(eval_pts.col(i));
    proxy_vals.array() -= proxy_vals.mean();
    proxy_norm = proxy_vals.norm();
  }

  // Held-out pair batch for the smoothed dual estimate.
  SeededRng held_rng = rng.split(0x0B71);
  const Index held_n = 512;
  Mat held_x(mu.dim(), held_n), held_y(nu.dim(), held_n);
  Vec held_c(held_n);
  for (Index m = 0; m < held_n; ++m) {
    held_x.col(m) = mu.draw(held_rng);
    held_y.col(m) = nu.draw(held_rng);
    held_c[m] = c(held_x.col(m), held_y.col(m));
  }

  double elapsed_ms = 0.0;
  auto checkpoint = [&](long k) {
    TraceCheckpoint cp;
    cp.pass = static_cast<double>(k);
    cp.wallclock_ms = elapsed_ms;
    double acc = 0.0;
    for (Index m = 0; m < held_n; ++m)
      acc += dual_integrand(exp.eval_u(held_x.col(m)), exp.eval_v(held_y.col(m)), held_c[m],
                            eps);
    cp.objective = acc / static_cast<double>(held_n);
    if (proxy_u) {
      Vec uv(n_eval);
      for (Index i = 0; i < n_eval; ++i) uv[i] = exp.eval_u(eval_pts.col(i));
      uv.array() -= uv.mean();
      double err = (uv - proxy_vals).norm();
      cp.dist_ref_l2 = proxy_norm > 0.0 ? err / proxy_norm : err;
    }
    result.trace.append(std::move(cp));
  };

  std::vector<long> grid = geometric_checkpoints(cfg.max_passes);
  std::size_t next = 0;
  for (long k = 1; k <= cfg.max_passes; ++k) {
    auto t0 = Clock::now();
    Point x = mu.draw(rng);
    Point y = nu.draw(rng);
    exp.step(x, y, c(x, y));
    elapsed_ms += ms_between(t0, Clock::now());
    if (next < grid.size() && k == grid[next]) {
      checkpoint(k);
      ++next;
    }
  }
  if (result.trace.empty() && cfg.max_passes > 0) checkpoint(cfg.max_passes);
  return result;
}

void write_expansion_csv(const std::string& path, const KernelExpansion& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_expansion_csv: cannot open " + path);
  out << "k,alpha";
  for (Index d = 0; d < e.xs().rows(); ++d) out << ",x" << d;
  for (Index d = 0; d < e.ys().rows(); ++d) out << ",y" << d;
  out << '\n';
  for (Index i = 0; i < e.size(); ++i) {
    out << e.step_of_entry(i) << ',' << format_double(e.alpha(i));
    for (Index d = 0; d < e.xs().rows(); ++d) out << ',' << format_double(e.xs()(d, i));
    for (Index d = 0; d < e.ys().rows(); ++d) out << ',' << format_double(e.ys()(d, i));
    out << '\n';
  }
}

}  // namespace stochot
