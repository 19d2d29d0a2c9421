#include "stochot/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace stochot {

std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::invalid_argument("parse_double: bad number '" + field + "'");
  return value;
}

Mat load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_point_cloud: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> coords;
    double x;
    while (ls >> x) coords.push_back(x);
    if (!ls.eof())
      throw std::invalid_argument("load_point_cloud: malformed value on line " +
                                  std::to_string(line_no) + " of " + path);
    if (coords.empty()) continue;  // blank line
    if (!rows.empty() && coords.size() != rows.front().size())
      throw std::invalid_argument("load_point_cloud: line " + std::to_string(line_no) +
                                  " has dimension " + std::to_string(coords.size()) +
                                  ", expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(coords));
  }
  if (rows.empty()) throw std::invalid_argument("load_point_cloud: no points in " + path);
  Mat points(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    points.col(static_cast<Index>(i)) =
        Eigen::Map<const Vec>(rows[i].data(), static_cast<Index>(rows[i].size()));
  return points;
}

Vec load_weight_file(const std::string& path, Index expected) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_weight_file: cannot open " + path);
  std::vector<double> ws;
  double w;
  while (in >> w) ws.push_back(w);
  if (!in.eof())
    throw std::invalid_argument("load_weight_file: malformed value in " + path);
  if (static_cast<Index>(ws.size()) != expected)
    throw std::invalid_argument("load_weight_file: " + std::to_string(ws.size()) +
                                " weights for " + std::to_string(expected) + " atoms");
  return Eigen::Map<const Vec>(ws.data(), static_cast<Index>(ws.size()));
}

DiscreteMeasure load_discrete_measure(const std::string& points_path,
                                      const std::optional<std::string>& weights_path) {
  Mat atoms = load_point_cloud(points_path);
  Vec w = weights_path ? load_weight_file(*weights_path, atoms.cols())
                       : Vec::Constant(atoms.cols(), 1.0 / static_cast<double>(atoms.cols()));
  return DiscreteMeasure(std::move(atoms), std::move(w));
}

void save_point_cloud(const std::string& path, const Mat& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("save_point_cloud: cannot open " + path);
  for (Index i = 0; i < points.cols(); ++i) {
    for (Index d = 0; d < points.rows(); ++d) {
      if (d) out << ' ';
      out << format_double(points(d, i));
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_csv_rows: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

void write_csv_rows(const std::string& path,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_csv_rows: cannot open " + path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

}  // namespace stochot
