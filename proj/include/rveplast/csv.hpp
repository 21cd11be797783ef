#pragma once

// CSV files written by the experiment runner. Reals are printed with 17
// significant digits, which round-trips IEEE doubles exactly.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rveplast/driver.hpp"

namespace rveplast::csv {

inline constexpr const char* kTrajectoryHeader = "sample_id,l,t,F11,s1,s2,s3,R1,R2,R3,energy";
inline constexpr const char* kErrorStudyHeader = "L,l,t,F11,alpha,e_sys,variance,reference_scaling";
inline constexpr const char* kSlopeHeader = "quantity,t_label,window,slope";

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct TrajectoryRow {
  int sample_id = 0;
  int l = 0;
  StressRecord record;
  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

inline void write_trajectory_header(std::ostream& os) { os << kTrajectoryHeader << '\n'; }

inline void write_trajectory_row(std::ostream& os, const TrajectoryRow& row) {
  const StressRecord& r = row.record;
  os << row.sample_id << ',' << row.l << ',' << num(r.t) << ',' << num(r.F.xx) << ',' << num(r.s[0]) << ','
     << num(r.s[1]) << ',' << num(r.s[2]) << ',' << num(r.R[0]) << ',' << num(r.R[1]) << ',' << num(r.R[2]) << ','
     << num(r.energy) << '\n';
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

/// Parses a trajectory file. F is rebuilt as diag(F11, 0) (the uniaxial
/// presets) and sigma from s.
inline std::vector<TrajectoryRow> read_trajectory(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader)
    throw std::runtime_error("trajectory csv: missing or wrong header");
  std::vector<TrajectoryRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 11) throw std::runtime_error("trajectory csv: line " + std::to_string(lineno) + " has " +
                                                 std::to_string(c.size()) + " fields");
    TrajectoryRow row;
    row.sample_id = std::stoi(c[0]);
    row.l = std::stoi(c[1]);
    StressRecord& r = row.record;
    r.t = std::stod(c[2]);
    r.F = SymTensor2::diag(std::stod(c[3]), 0.0);
    r.s = {std::stod(c[4]), std::stod(c[5]), std::stod(c[6])};
    r.sigma = ps_adjoint(r.s);
    r.R = {std::stod(c[7]), std::stod(c[8]), std::stod(c[9])};
    r.energy = std::stod(c[10]);
    rows.push_back(row);
  }
  return rows;
}

struct ErrorRow {
  int L = 0;
  int l = 0;
  double t = 0.0;
  double F11 = 0.0;
  int alpha = 1;  ///< 1-based edge type
  double e_sys = 0.0;
  double variance = 0.0;
  double reference_scaling = 0.0;
  friend bool operator==(const ErrorRow&, const ErrorRow&) = default;
};

inline void write_error_row(std::ostream& os, const ErrorRow& r) {
  os << r.L << ',' << r.l << ',' << num(r.t) << ',' << num(r.F11) << ',' << r.alpha << ',' << num(r.e_sys) << ','
     << num(r.variance) << ',' << num(r.reference_scaling) << '\n';
}

inline std::vector<ErrorRow> read_error_study(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kErrorStudyHeader)
    throw std::runtime_error("error-study csv: missing or wrong header");
  std::vector<ErrorRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 8) throw std::runtime_error("error-study csv: bad field count");
    rows.push_back({std::stoi(c[0]), std::stoi(c[1]), std::stod(c[2]), std::stod(c[3]), std::stoi(c[4]),
                    std::stod(c[5]), std::stod(c[6]), std::stod(c[7])});
  }
  return rows;
}

struct SlopeRow {
  std::string quantity;
  std::string t_label;
  std::string window;
  double slope = 0.0;
};

inline void write_slope_row(std::ostream& os, const SlopeRow& r) {
  os << r.quantity << ',' << r.t_label << ',' << r.window << ',' << num(r.slope) << '\n';
}

/// Custom strain path: header "t,F11,F12,F22", first row at F = 0.
inline StrainPath read_strain_path(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,F11,F12,F22")
    throw std::runtime_error("strain path csv: expected header t,F11,F12,F22");
  StrainPath path;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 4) throw std::runtime_error("strain path csv: line " + std::to_string(lineno) + ": need 4 fields");
    path.t.push_back(std::stod(c[0]));
    path.F.push_back({std::stod(c[1]), std::stod(c[2]), std::stod(c[3])});
  }
  path.validate();
  return path;
}

}  // namespace rveplast::csv
