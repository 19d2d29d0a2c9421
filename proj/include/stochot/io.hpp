#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochot/measures.hpp"
#include "stochot/types.hpp"

namespace stochot {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

// Exact inverse of format_double; rejects trailing garbage.
double parse_double(const std::string& field);

// Point-cloud text format: one point per line, coordinates separated by
// whitespace. All lines must agree on the dimension.
Mat load_point_cloud(const std::string& path);

// One weight per line, as many lines as atoms.
Vec load_weight_file(const std::string& path, Index expected);

DiscreteMeasure load_discrete_measure(const std::string& points_path,
                                      const std::optional<std::string>& weights_path);

void save_point_cloud(const std::string& path, const Mat& points);

// Plain comma-separated tables, no quoting: fields must not contain commas
// or newlines. Writing then reading is the identity on such tables.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path);
void write_csv_rows(const std::string& path,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace stochot
