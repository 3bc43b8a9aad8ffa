#ifndef GPSCALE_IO_HPP
#define GPSCALE_IO_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpscale/graph.hpp"
#include "gpscale/grid.hpp"

namespace gpscale {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Sidecar path of a grid CSV: the extension is replaced by ".json".
inline std::string sidecar_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return csv_path + ".json";
  }
  return csv_path.substr(0, dot) + ".json";
}

// Count grids: CSV of integers, row-major, -1 encodes missing cells. Shape
// and cell size travel in a JSON sidecar {"rows", "cols", "cell_size"}.
inline void write_count_grid(const std::string& path, const MaskedGrid& grid) {
  grid.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_count_grid: cannot open " + path);
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      if (j > 0) out << ',';
      if (grid.mask(i, j)) {
        out << static_cast<long long>(std::llround(grid.values(i, j)));
      } else {
        out << -1;
      }
    }
    out << '\n';
  }
  nlohmann::json meta{{"rows", grid.values.rows()},
                      {"cols", grid.values.cols()},
                      {"cell_size", grid.cell_size}};
  std::ofstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("write_count_grid: cannot open " + sidecar_path(path));
  side << meta.dump() << '\n';
}

inline MaskedGrid read_count_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_count_grid: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("read_count_grid: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_count_grid: empty grid in " + path);
  MaskedGrid grid;
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.front().size());
  grid.values.resize(r, c);
  grid.mask.resize(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const bool observed = v >= 0.0;
      grid.mask(i, j) = observed;
      grid.values(i, j) = observed ? v : 0.0;
    }
  }
  std::ifstream side(sidecar_path(path));
  if (side) {
    nlohmann::json meta = nlohmann::json::parse(side);
    if (meta.contains("rows") && meta["rows"].get<Eigen::Index>() != r) {
      throw std::invalid_argument("read_count_grid: sidecar rows disagree with CSV");
    }
    if (meta.contains("cols") && meta["cols"].get<Eigen::Index>() != c) {
      throw std::invalid_argument("read_count_grid: sidecar cols disagree with CSV");
    }
    if (meta.contains("cell_size")) grid.cell_size = meta["cell_size"].get<double>();
  }
  grid.validate();
  return grid;
}

// Real-valued grids (posterior summaries, filter output); undefined cells are
// written as nan.
inline void write_real_grid(const std::string& path, const Eigen::MatrixXd& values,
                            double cell_size = 1.0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_real_grid: cannot open " + path);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  nlohmann::json meta{{"rows", values.rows()}, {"cols", values.cols()}, {"cell_size", cell_size}};
  std::ofstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("write_real_grid: cannot open " + sidecar_path(path));
  side << meta.dump() << '\n';
}

inline Eigen::MatrixXd read_real_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_real_grid: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("read_real_grid: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_real_grid: empty grid in " + path);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return values;
}

// Edge lists: two-column CSV with header "parent,child", 1-based labels.
inline void write_edge_list(const std::string& path, const EdgeList& edges) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_list: cannot open " + path);
  out << "parent,child\n";
  for (std::size_t e = 0; e < edges.predecessors.size(); ++e) {
    out << edges.predecessors[e] << ',' << edges.successors[e] << '\n';
  }
}

inline EdgeList read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_edge_list: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "parent,child") {
    throw std::invalid_argument("read_edge_list: expected header 'parent,child' in " + path);
  }
  EdgeList edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("read_edge_list: malformed line '" + line + "'");
    }
    edges.predecessors.push_back(std::stoi(line.substr(0, comma)));
    edges.successors.push_back(std::stoi(line.substr(comma + 1)));
  }
  return edges;
}

}  // namespace gpscale

#endif  // GPSCALE_IO_HPP
