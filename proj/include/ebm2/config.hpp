#pragma once

// JSON run configuration. Every object rejects unknown keys and every error
// names the offending key path (e.g. "run.rel_tol").

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ebm2/integrator.hpp"
#include "ebm2/model.hpp"
#include "ebm2/qualitative.hpp"

namespace ebm2 {

inline constexpr int kConfigSchema = 1;

struct IcConfig {
  enum class Kind { constant, legendre_coeffs, random };
  Kind kind = Kind::constant;
  double t_a = 1.0;  // constant
  double t_s = 1.0;
  std::vector<double> coeffs_a, coeffs_s;  // legendre-coeffs (zero padded)
  std::uint64_t seed = 0;                  // random
  RandomStateSpec random;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"coeffs", "nodal", "energy"};
  int nodal_points = 33;  // Chebyshev-Lobatto abscissae of the nodal CSV
};

struct RunConfig {
  ModelParams params;
  ReactionTerms terms = ReactionTerms::full;
  QShape q;
  Forcing::RKind r_kind = Forcing::RKind::constant;
  double r0 = 1.0, r_delta = 0.0, r_omega = 0.0;
  Coalbedo beta_a = Coalbedo::constant(0.0);
  Coalbedo beta_s = Coalbedo::constant(1.0);
  int n_modes = 32;
  int n_quad = 0;
  IcConfig ic;
  double t_max = 10.0;
  StepControls controls;
  OutputConfig outputs;
  bool expect_blowup = false;

  GridPtr make_grid() const;
  Forcing make_forcing(const GridPtr& grid) const;
  Model make_model(const GridPtr& grid) const;
  StateVec make_ic(const GridPtr& grid) const;
};

/// Parses and validates; throws ConfigError(key path, reason).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Full effective configuration (all defaults spelled out). Parsing it back
/// reproduces the same run.
std::string dump_config(const RunConfig& cfg);

/// Sets one dotted-path numeric parameter (used by scans), e.g. "model.eps_a".
void set_parameter(RunConfig& cfg, const std::string& path, double value);

}  // namespace ebm2
