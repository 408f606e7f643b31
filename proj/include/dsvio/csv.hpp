#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsvio/scheme.hpp"

namespace dsvio {

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: cannot parse number '" + s + "'");
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

/// Trajectory CSV: header t,x_1,...,x_n, one row per node.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  auto out = open_output(path);
  const Index n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (Index i = 1; i <= n; ++i) out << ",x_" << i;
  out << "\n";
  for (Index nu = 0; nu < traj.num_nodes(); ++nu) {
    out << format_number(traj.node_time(nu));
    const Vector& x = traj.states[static_cast<std::size_t>(nu)];
    for (Index i = 0; i < n; ++i) out << "," << format_number(x[i]);
    out << "\n";
  }
}

inline void expect_header(const std::vector<std::string>& got,
                          const std::vector<std::string>& want, const std::string& path) {
  if (got != want) {
    std::string msg = "csv: unexpected header in " + path + "; expected ";
    for (const auto& c : want) msg += c + ",";
    throw std::runtime_error(msg);
  }
}

}  // namespace dsvio
