#include "stochot/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stochot/io.hpp"

namespace stochot {

namespace {

std::string field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::optional<double> parse_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace,
                     bool zero_wallclock) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_trace_csv: cannot open " + path);
  out << "pass,grad_l1,dist_ref_l2,objective,wallclock_ms\n";
  for (const TraceCheckpoint& cp : trace.checkpoints) {
    out << format_double(cp.pass) << ',' << field(cp.grad_l1) << ',' << field(cp.dist_ref_l2)
        << ',' << field(cp.objective) << ','
        << format_double(zero_wallclock ? 0.0 : cp.wallclock_ms) << '\n';
  }
}

ConvergenceTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "pass,grad_l1,dist_ref_l2,objective,wallclock_ms")
    throw std::invalid_argument("read_trace_csv: bad header in " + path);
  ConvergenceTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5)
      throw std::invalid_argument("read_trace_csv: expected 5 fields, got " +
                                  std::to_string(fields.size()));
    TraceCheckpoint cp;
    cp.pass = parse_double(fields[0]);
    cp.grad_l1 = parse_field(fields[1]);
    cp.dist_ref_l2 = parse_field(fields[2]);
    cp.objective = parse_field(fields[3]);
    cp.wallclock_ms = parse_double(fields[4]);
    trace.append(std::move(cp));
  }
  return trace;
}

std::optional<double> passes_to_tolerance(const ConvergenceTrace& trace, double tol) {
  for (const TraceCheckpoint& cp : trace.checkpoints)
    if (cp.grad_l1 && *cp.grad_l1 <= tol) return cp.pass;
  return std::nullopt;
}

std::vector<long> geometric_checkpoints(long k_max) {
  std::vector<long> ks;
  for (int m = 0;; ++m) {
    long k = std::lround(std::pow(10.0, static_cast<double>(m) / 12.0));
    if (k > k_max) break;
    if (ks.empty() || k > ks.back()) ks.push_back(k);
  }
  if (k_max > 0 && (ks.empty() || ks.back() != k_max)) ks.push_back(k_max);
  return ks;
}

}  // namespace stochot
