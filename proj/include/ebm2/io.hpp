#pragma once

// CSV artifacts. Numbers are printed with %.17g so a file round-trips to the
// exact doubles, and every file is written to a temporary name and renamed.

#include <filesystem>
#include <string>
#include <vector>

#include "ebm2/integrator.hpp"

namespace ebm2 {

std::string format_double(double v);

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Long form `t,mode,field,coeff`.
std::string coeffs_csv(const TrajectoryRecord& rec);
/// `t,x,T_a,T_s` on n_points Chebyshev-Lobatto abscissae.
std::string nodal_csv(const TrajectoryRecord& rec, int n_points);
/// `t,E_H,E_V`.
std::string energy_csv(const TrajectoryRecord& rec);
/// `x,T_a,T_s` for a single state.
std::string profile_csv(const StateVec& state, int n_points);

struct CheckRow {
  std::string name;
  bool passed;
  double worst_value;
  double tolerance;
  std::string detail;  // text report only
};

/// `check_name,passed,worst_value,tolerance`.
std::string checks_csv(const std::vector<CheckRow>& rows);
std::string checks_text(const std::vector<CheckRow>& rows);

}  // namespace ebm2
