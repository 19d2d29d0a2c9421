#include "stochot/measures.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <string>

namespace stochot {

namespace {

Vec cumulative(const Vec& w) {
  Vec cum(w.size());
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    cum[i] = acc;
  }
  return cum;
}

// First index whose cumulative weight exceeds u. Zero-weight atoms are
// never selected because they do not advance the CDF.
Index inverse_cdf(const Vec& cum, double u) {
  Index lo = 0, hi = cum.size() - 1;
  while (lo < hi) {
    Index mid = (lo + hi) / 2;
    if (u < cum[mid])
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Mat atoms, Vec weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.cols() == 0) throw std::invalid_argument("DiscreteMeasure: no atoms");
  if (weights_.size() != atoms_.cols())
    throw std::invalid_argument("DiscreteMeasure: " + std::to_string(atoms_.cols()) +
                                " atoms but " + std::to_string(weights_.size()) + " weights");
  if (!atoms_.allFinite())
    throw std::invalid_argument("DiscreteMeasure: atom coordinates must be finite");
  for (Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0))
      throw std::invalid_argument("DiscreteMeasure: weight " + std::to_string(i) +
                                  " is negative or not finite");
  }
  double total = weights_.sum();
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total) +
                                ", beyond the 1e-9 renormalization band");
  // Weights already on the simplex within 1e-12 are stored untouched so
  // exact inputs (e.g. 1/N) survive ingestion bit for bit.
  if (std::abs(total - 1.0) > 1e-12) weights_ /= total;
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw std::invalid_argument("GaussianMixture: no components");
  dim_ = static_cast<int>(components_[0].mean.size());
  if (dim_ <= 0) throw std::invalid_argument("GaussianMixture: dimension must be positive");

  Vec w(static_cast<Index>(components_.size()));
  chol_lower_.reserve(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const GaussianComponent& c = components_[k];
    if (c.mean.size() != dim_ || c.covariance.rows() != dim_ || c.covariance.cols() != dim_)
      throw std::invalid_argument("GaussianMixture: component " + std::to_string(k) +
                                  " has inconsistent dimensions");
    if (!c.mean.allFinite() || !c.covariance.allFinite())
      throw std::invalid_argument("GaussianMixture: component " + std::to_string(k) +
                                  " has non-finite parameters");
    if (!(c.weight > 0.0))
      throw std::invalid_argument("GaussianMixture: component weights must be positive");
    Eigen::LLT<Mat> llt(c.covariance);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("GaussianMixture: covariance of component " +
                                  std::to_string(k) + " is not positive definite");
    chol_lower_.push_back(llt.matrixL());
    w[static_cast<Index>(k)] = c.weight;
  }
  w /= w.sum();
  for (std::size_t k = 0; k < components_.size(); ++k)
    components_[k].weight = w[static_cast<Index>(k)];
  cum_weights_ = cumulative(w);
}

Point GaussianMixture::draw(SeededRng& rng) const {
  Index k = inverse_cdf(cum_weights_, rng.uniform01());
  Vec z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
  return components_[static_cast<std::size_t>(k)].mean + chol_lower_[static_cast<std::size_t>(k)] * z;
}

EmpiricalSampler::EmpiricalSampler(DiscreteMeasure measure)
    : measure_(std::move(measure)), cum_weights_(cumulative(measure_.weights())) {}

Point EmpiricalSampler::draw(SeededRng& rng) const {
  return measure_.atom(inverse_cdf(cum_weights_, rng.uniform01()));
}

GaussianMixture make_gaussian_mixture(const std::vector<Vec>& means,
                                      const std::vector<Mat>& rotations, int dim) {
  if (dim <= 0) throw std::invalid_argument("make_gaussian_mixture: dim must be positive");
  if (means.size() != rotations.size() || means.empty())
    throw std::invalid_argument("make_gaussian_mixture: need equally many means and rotations");
  std::vector<GaussianComponent> comps;
  comps.reserve(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    const Mat& r = rotations[k];
    if (r.rows() != r.cols())
      throw std::invalid_argument("make_gaussian_mixture: rotation " + std::to_string(k) +
                                  " is not square");
    if (r.rows() != dim || means[k].size() != dim)
      throw std::invalid_argument("make_gaussian_mixture: component " + std::to_string(k) +
                                  " does not match dim");
    GaussianComponent c;
    c.mean = means[k];
    c.covariance = 0.01 * (r.transpose() + r) + 3.0 * Mat::Identity(dim, dim);
    c.weight = 1.0;
    comps.push_back(std::move(c));
  }
  return GaussianMixture(std::move(comps));
}

EmpiricalSampler empirical_wrap(const DiscreteMeasure& m) { return EmpiricalSampler(m); }

DiscreteMeasure empirical_from(const ContinuousSampler& s, Index n, SeededRng& rng) {
  if (n <= 0) throw std::invalid_argument("empirical_from: sample count must be positive");
  Mat atoms(s.dim(), n);
  for (Index i = 0; i < n; ++i) atoms.col(i) = s.draw(rng);
  Vec w = Vec::Constant(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(std::move(atoms), std::move(w));
}

}  // namespace stochot
