#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stochot {

// Deterministic random source. All sampling in the library goes through this
// class so that a seed fixes every draw exactly: the engine is mt19937_64
// (bit-exact by the standard) and the transforms below avoid the
// implementation-defined std::*_distribution adapters.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform double in [0, 1), 53 significant bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform index in {0, ..., n-1}.
  std::size_t uniform_below(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Standard normal via Box-Muller. The sine partner is discarded to keep
  // the stream a pure function of the draw count.
  double normal() {
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Independent stream derived from the base seed, not from the current
  // engine state. Stream k of two equal-seed generators is identical no
  // matter how many draws either has made.
  SeededRng split(std::uint64_t stream) const {
    return SeededRng(seed_ + 0x9E3779B97F4A7C15ull * (stream + 1));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace stochot
