#pragma once

#include <memory>
#include <vector>

#include "stochot/rng.hpp"
#include "stochot/types.hpp"

namespace stochot {

// Finitely supported probability measure. Atoms are stored one per column
// (d x n); weights live on the simplex: nonnegative, summing to 1 within
// 1e-12. Ingestion renormalizes a sum deviation of at most 1e-9 and rejects
// anything worse.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Mat atoms, Vec weights);

  Index size() const { return atoms_.cols(); }
  int dim() const { return static_cast<int>(atoms_.rows()); }
  const Mat& atoms() const { return atoms_; }
  const Vec& weights() const { return weights_; }
  Mat::ConstColXpr atom(Index i) const { return atoms_.col(i); }

 private:
  Mat atoms_;
  Vec weights_;
};

// Sampling interface for measures given by a generative process.
class ContinuousSampler {
 public:
  virtual ~ContinuousSampler() = default;
  virtual int dim() const = 0;
  virtual Point draw(SeededRng& rng) const = 0;
};

struct GaussianComponent {
  Vec mean;
  Mat covariance;
  double weight = 1.0;
};

// Mixture of full-covariance Gaussians. Covariances must be symmetric
// positive definite (checked via Cholesky at construction).
class GaussianMixture : public ContinuousSampler {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  int dim() const override { return dim_; }
  Point draw(SeededRng& rng) const override;

  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  std::vector<GaussianComponent> components_;
  std::vector<Mat> chol_lower_;
  Vec cum_weights_;
  int dim_;
};

// Samples from a discrete measure by inverse CDF on its weights.
class EmpiricalSampler : public ContinuousSampler {
 public:
  explicit EmpiricalSampler(DiscreteMeasure measure);

  int dim() const override { return measure_.dim(); }
  Point draw(SeededRng& rng) const override;
  const DiscreteMeasure& measure() const { return measure_; }

 private:
  DiscreteMeasure measure_;
  Vec cum_weights_;
};

// Equal-weight mixture with covariance 0.01*(R^T + R) + 3*I_d per component.
// rotations[k] must be d x d.
GaussianMixture make_gaussian_mixture(const std::vector<Vec>& means,
                                      const std::vector<Mat>& rotations, int dim);

inline Point sample(const ContinuousSampler& s, SeededRng& rng) { return s.draw(rng); }

EmpiricalSampler empirical_wrap(const DiscreteMeasure& m);

// N i.i.d. draws, each carrying weight 1/N.
DiscreteMeasure empirical_from(const ContinuousSampler& s, Index n, SeededRng& rng);

}  // namespace stochot
