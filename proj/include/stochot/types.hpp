#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stochot {

template <typename Scalar>
using VecX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecX<double>;
using Mat = MatX<double>;
using Index = Eigen::Index;

// A point of a ground space R^d.
using Point = Vec;

// Transport plans are dense I x J matrices of nonnegative mass.
using TransportPlan = Mat;

// Regularization strength. Zero selects the unregularized branches
// (hard minima / subgradients) throughout the library.
class Epsilon {
 public:
  explicit Epsilon(double value) : value_(value) {
    if (!(value >= 0.0))
      throw std::invalid_argument("Epsilon: value must be finite and >= 0, got " +
                                  std::to_string(value));
  }

  double value() const { return value_; }
  bool regularized() const { return value_ > 0.0; }

 private:
  double value_;
};

// Thrown when a solver or evaluation leaves the representable range
// (overflowing exponents, failure to converge within a hard cap).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stochot
