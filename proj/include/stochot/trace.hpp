#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochot/types.hpp"

namespace stochot {

struct TraceCheckpoint {
  double pass = 0.0;  // passes for discrete solvers, iteration count for stochastic ones
  std::optional<double> grad_l1;
  std::optional<double> dist_ref_l2;
  std::optional<double> objective;
  double wallclock_ms = 0.0;
};

// Checkpoint log of one solver run. Pass counts must be strictly increasing.
struct ConvergenceTrace {
  std::vector<TraceCheckpoint> checkpoints;
  std::vector<Vec> iterates;  // filled only when snapshot recording is on

  void append(TraceCheckpoint cp) {
    if (!checkpoints.empty() && !(cp.pass > checkpoints.back().pass))
      throw std::invalid_argument("ConvergenceTrace: pass counts must strictly increase");
    checkpoints.push_back(std::move(cp));
  }

  bool empty() const { return checkpoints.empty(); }
  const TraceCheckpoint& back() const { return checkpoints.back(); }
};

// CSV schema: header pass,grad_l1,dist_ref_l2,objective,wallclock_ms with
// shortest-roundtrip decimals; absent optional fields stay empty. zero_wallclock
// drops timings so that equal-seed runs serialize to identical bytes.
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace,
                     bool zero_wallclock = false);
ConvergenceTrace read_trace_csv(const std::string& path);

// First checkpoint whose grad_l1 is at or below tol, if any.
std::optional<double> passes_to_tolerance(const ConvergenceTrace& trace, double tol);

// Checkpoint schedule for iteration-indexed solvers: twelve points per
// decade, the exact powers of ten, and the final iteration.
std::vector<long> geometric_checkpoints(long k_max);

}  // namespace stochot
