#include "stochot/costs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stochot/io.hpp"

namespace stochot {

CostFunction::CostFunction(Kind kind, double power, double scale)
    : kind_(kind), power_(power), scale_(scale) {
  if (!(scale_ > 0.0) || !std::isfinite(scale_))
    throw std::invalid_argument("CostFunction: scale must be positive and finite");
  if (kind_ == Kind::EuclideanPower && (!(power_ >= 1.0) || !std::isfinite(power_)))
    throw std::invalid_argument("CostFunction: exponent must be >= 1");
}

CostFunction CostFunction::squared_euclidean(double scale) {
  return CostFunction(Kind::SquaredEuclidean, 2.0, scale);
}

CostFunction CostFunction::euclidean_power(double p, double scale) {
  return CostFunction(Kind::EuclideanPower, p, scale);
}

CostFunction CostFunction::with_scale(double scale) const {
  return CostFunction(kind_, power_, scale);
}

double CostFunction::operator()(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y) const {
  if (x.size() != y.size())
    throw std::invalid_argument("CostFunction: points of dimension " + std::to_string(x.size()) +
                                " and " + std::to_string(y.size()));
  if (kind_ == Kind::SquaredEuclidean) return scale_ * (x - y).squaredNorm();
  return scale_ * std::pow((x - y).norm(), power_);
}

CostMatrix build_cost_matrix(const CostFunction& c, const Mat& xs, const Mat& ys) {
  if (xs.cols() == 0 || ys.cols() == 0)
    throw std::invalid_argument("build_cost_matrix: empty point list");
  if (xs.rows() != ys.rows())
    throw std::invalid_argument("build_cost_matrix: dimension mismatch between point lists");
  CostMatrix out;
  out.entries.resize(xs.cols(), ys.cols());
  for (Index j = 0; j < ys.cols(); ++j)
    for (Index i = 0; i < xs.cols(); ++i)
      out.entries(i, j) = c(xs.col(i), ys.col(j));
  out.entries_t = out.entries.transpose();
  out.row_points = xs;
  out.col_points = ys;
  out.cost = c;
  return out;
}

CostFunction median_rescale(const CostFunction& c, const Mat& pool, Index n_pairs,
                            SeededRng& rng) {
  if (pool.cols() < 2)
    throw std::invalid_argument("median_rescale: pool needs at least two points");
  if (n_pairs <= 0) throw std::invalid_argument("median_rescale: n_pairs must be positive");
  std::vector<double> costs(static_cast<std::size_t>(n_pairs));
  std::size_t n = static_cast<std::size_t>(pool.cols());
  for (std::size_t t = 0; t < costs.size(); ++t) {
    std::size_t i = rng.uniform_below(n);
    std::size_t j = rng.uniform_below(n - 1);
    if (j >= i) ++j;
    costs[t] = c(pool.col(static_cast<Index>(i)), pool.col(static_cast<Index>(j)));
  }
  std::size_t mid = (costs.size() - 1) / 2;
  std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(mid), costs.end());
  double median = costs[mid];
  if (!(median > 0.0))
    throw std::invalid_argument("median_rescale: sampled median cost is zero");
  return c.with_scale(c.scale() / median);
}

void export_cost_csv(const CostMatrix& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("export_cost_csv: cannot open " + path);
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) {
      if (j) out << ',';
      out << format_double(c.entries(i, j));
    }
    out << '\n';
  }
}

EmbeddingTable load_embeddings(const std::string& path, Index skip_top, Index take,
                               SeededRng& rng) {
  if (skip_top < 0 || take <= 0)
    throw std::invalid_argument("load_embeddings: need skip_top >= 0 and take > 0");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_embeddings: cannot open " + path);

  // Reservoir over the post-skip stream: slot replacement keeps each
  // surviving line equally likely without buffering the file.
  std::vector<std::string> tokens(static_cast<std::size_t>(take));
  std::vector<Vec> vectors(static_cast<std::size_t>(take));
  Index dim = -1;
  Index line_no = 0;
  Index seen = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token))
      throw std::invalid_argument("load_embeddings: line " + std::to_string(line_no) +
                                  " has no token");
    std::vector<double> coords;
    double x;
    while (ls >> x) coords.push_back(x);
    if (!ls.eof())
      throw std::invalid_argument("load_embeddings: line " + std::to_string(line_no) +
                                  " has a malformed coordinate");
    if (coords.empty())
      throw std::invalid_argument("load_embeddings: line " + std::to_string(line_no) +
                                  " has no coordinates");
    if (dim < 0) dim = static_cast<Index>(coords.size());
    if (static_cast<Index>(coords.size()) != dim)
      throw std::invalid_argument("load_embeddings: line " + std::to_string(line_no) + " has " +
                                  std::to_string(coords.size()) + " coordinates, expected " +
                                  std::to_string(dim));
    if (line_no <= skip_top) continue;
    Index slot;
    if (seen < take) {
      slot = seen;
    } else {
      std::size_t r = rng.uniform_below(static_cast<std::size_t>(seen) + 1);
      slot = r < static_cast<std::size_t>(take) ? static_cast<Index>(r) : -1;
    }
    if (slot >= 0) {
      tokens[static_cast<std::size_t>(slot)] = token;
      vectors[static_cast<std::size_t>(slot)] =
          Eigen::Map<const Vec>(coords.data(), static_cast<Index>(coords.size()));
    }
    ++seen;
  }
  if (seen < take)
    throw std::invalid_argument("load_embeddings: requested " + std::to_string(take) +
                                " entries but only " + std::to_string(seen) +
                                " remain after skipping " + std::to_string(skip_top));
  EmbeddingTable table;
  table.tokens = std::move(tokens);
  table.vectors.resize(dim, take);
  for (Index i = 0; i < take; ++i) table.vectors.col(i) = vectors[static_cast<std::size_t>(i)];
  return table;
}

}  // namespace stochot
