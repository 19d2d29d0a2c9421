#pragma once

#include <string>
#include <vector>

#include "stochot/rng.hpp"
#include "stochot/types.hpp"

namespace stochot {

// Ground cost c(x, y) = scale * ||x - y||^p. Squared Euclidean is the p = 2
// case evaluated without the square root.
class CostFunction {
 public:
  enum class Kind { SquaredEuclidean, EuclideanPower };

  static CostFunction squared_euclidean(double scale = 1.0);
  static CostFunction euclidean_power(double p, double scale = 1.0);

  double operator()(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y) const;

  Kind kind() const { return kind_; }
  double power() const { return power_; }
  double scale() const { return scale_; }
  CostFunction with_scale(double scale) const;

 private:
  CostFunction(Kind kind, double power, double scale);
  Kind kind_;
  double power_;
  double scale_;
};

inline double eval_cost(const CostFunction& c, Eigen::Ref<const Vec> x,
                        Eigen::Ref<const Vec> y) {
  return c(x, y);
}

// Dense pairwise cost table between two point lists, kept with the inputs
// that produced it so entries can be recomputed bit for bit.
struct CostMatrix {
  Mat entries;    // I x J
  Mat entries_t;  // J x I copy; column i is row i of entries, for contiguous row access
  Mat row_points; // d x I
  Mat col_points; // d x J
  CostFunction cost = CostFunction::squared_euclidean();

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

CostMatrix build_cost_matrix(const CostFunction& c, const Mat& xs, const Mat& ys);

// Rescales c so the empirical median cost over n_pairs random pairs from the
// pool becomes 1. Pairs are drawn with replacement; the two indices of a pair
// are always distinct. Even pair counts take the lower middle order statistic.
CostFunction median_rescale(const CostFunction& c, const Mat& pool, Index n_pairs,
                            SeededRng& rng);

void export_cost_csv(const CostMatrix& c, const std::string& path);

struct EmbeddingTable {
  std::vector<std::string> tokens;
  Mat vectors;  // d x n, column per token
};

// Reads a text embedding file (token then d floats per line), skips the
// skip_top most frequent entries, and reservoir-samples take rows from the
// rest in one streaming pass.
EmbeddingTable load_embeddings(const std::string& path, Index skip_top, Index take,
                               SeededRng& rng);

}  // namespace stochot
