#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/format.hpp"
#include "ubve/heat.hpp"
#include "ubve/surface.hpp"

namespace ubve {

namespace detail {

/// Numeric rows of a CSV file; a leading non-numeric line is taken as header.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw InvalidArgument(what + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument(what + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument(what + ": no data rows");
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// `index,x,y,z,value`, one row per surface node.
inline void write_trace_csv(std::ostream& out, const Surface& surface, const Vector& values) {
  out << "index,x,y,z,value\n";
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const Point& p = surface.node(i);
    out << i << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
        << format_double(p.z()) << ',' << format_double(values[static_cast<Eigen::Index>(i)])
        << '\n';
  }
}

/// Reads a trace CSV; the value is the last column and row i belongs to node i.
inline Vector read_trace_csv(const std::string& path, const Surface& surface) {
  auto in = detail::open_input(path);
  const auto rows = detail::read_numeric_csv(in, path);
  if (rows.size() != surface.size())
    throw InvalidArgument(path + ": " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(surface.size()) + " surface nodes");
  Vector v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = rows[i].back();
  return v;
}

/// `<axis>,value` series for heat traces.
inline void write_series_csv(std::ostream& out, const std::string& axis, const Vector& grid,
                             const Vector& values) {
  out << axis << ",value\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    out << format_double(grid[i]) << ',' << format_double(values[i]) << '\n';
}

inline std::pair<Vector, Vector> read_series_csv(const std::string& path) {
  auto in = detail::open_input(path);
  const auto rows = detail::read_numeric_csv(in, path);
  if (rows.front().size() != 2) throw InvalidArgument(path + ": expected two columns");
  Vector g(static_cast<Eigen::Index>(rows.size())), v(g.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g[static_cast<Eigen::Index>(i)] = rows[i][0];
    v[static_cast<Eigen::Index>(i)] = rows[i][1];
  }
  return {g, v};
}

/// Points CSV with columns x,y,z.
inline std::vector<Point> read_points_csv(const std::string& path) {
  auto in = detail::open_input(path);
  const auto rows = detail::read_numeric_csv(in, path);
  if (rows.front().size() != 3) throw InvalidArgument(path + ": expected columns x,y,z");
  std::vector<Point> pts;
  for (const auto& r : rows) pts.emplace_back(r[0], r[1], r[2]);
  return pts;
}

/// Points CSV with columns t,x.
inline std::vector<SpaceTimePoint> read_spacetime_csv(const std::string& path) {
  auto in = detail::open_input(path);
  const auto rows = detail::read_numeric_csv(in, path);
  if (rows.front().size() != 2) throw InvalidArgument(path + ": expected columns t,x");
  std::vector<SpaceTimePoint> pts;
  for (const auto& r : rows) pts.push_back({r[0], r[1]});
  return pts;
}

}  // namespace ubve
