#pragma once

// Spatially homogeneous companion system (constant insolation q_bar):
//
//   gamma_a T_a' = -lambda (T_a - T_s) + eps sigma |T_s|^3 T_s - 2 eps sigma |T_a|^3 T_a + q_bar beta_a(T_a)
//   gamma_s T_s' = -lambda (T_s - T_a) - sigma |T_s|^3 T_s + eps sigma |T_a|^3 T_a + q_bar beta_s(T_s)
//
// Its solutions are sub/super-solutions of the PDE, which is what the
// comparison harness uses them for.

#include <optional>
#include <utility>
#include <vector>

#include "ebm2/model.hpp"

namespace ebm2 {

struct OdeState {
  double t_a = 0.0;
  double t_s = 0.0;
};

struct OdeSystem {
  ModelParams params;
  double q_bar = 1.0;
  Coalbedo beta_a = Coalbedo::constant(0.0);
  Coalbedo beta_s = Coalbedo::constant(1.0);
  // Lets find_equilibria run with beta_a != 0 (no theoretical backing).
  bool experimental = false;
};

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<OdeState> states;
  bool blew_up = false;
  std::optional<std::pair<double, double>> t_star_bracket;
};

struct OdeOptions {
  double blowup_threshold = 1e8;
  /// 0: record every accepted step. Otherwise steps are clipped to land on
  /// multiples of record_every, which are recorded exactly.
  double record_every = 0.0;
  double dt_init = 0.0;  // 0: automatic
  double dt_min = 1e-300;
  long max_steps = 20'000'000;
};

OdeState ode_rhs(double t, const OdeState& y, const OdeSystem& sys);

/// Dormand-Prince 5(4) with per-step error <= tol (1 + |y|). On
/// max(|T_a|, |T_s|) > blowup_threshold the last step is bisected until the
/// escape bracket is narrower than 1e-6 t_hi.
OdeTrajectory integrate_ode(const OdeState& y0, const OdeSystem& sys, double t_max, double tol,
                            const OdeOptions& opt = {});

/// Linear interpolation in a recorded trajectory (for off-grid queries).
OdeState sample(const OdeTrajectory& traj, double t);

/// Default equilibrium search bound: 10 (q_bar sup beta_s/(sigma (2 - eps)))^(1/4).
double default_search_max(const OdeSystem& sys);
/// T_a as a function of T_s on the first nullcline (beta_a = 0).
double nullcline_phi(const OdeSystem& sys, double t_s);
/// Second stationarity equation evaluated along the nullcline.
double equilibrium_residual(const OdeSystem& sys, double t_s);

/// All equilibria with T_s in [0, search_max] (<= 0 selects the default),
/// sorted by T_s.
std::vector<OdeState> find_equilibria(const OdeSystem& sys, double search_max = 0.0);
OdeState warmest_equilibrium(const OdeSystem& sys);
OdeState coldest_equilibrium(const OdeSystem& sys);

struct InvariantRectangle {
  double m = 0.0;
  double mu = 0.0;
  bool range_warning = false;  // m > 1e6: margin mu^4 - eps is nearly gone
  bool verified = false;       // boundary-seeded trajectories stayed inside
  double worst_excursion = 0.0;  // relative, over the verification trajectories
};

/// Both outflow edges point inward at (m, mu).
bool rectangle_inward(const OdeSystem& sys, double m, double mu, int edge_points = 512);
InvariantRectangle minimal_rectangle(const OdeSystem& sys, double mu, bool verify = true);
/// 32 boundary-seeded trajectories on [0, t_max]; returns the worst relative exit.
double rectangle_excursion(const OdeSystem& sys, const InvariantRectangle& rect, double t_max,
                           int n_seeds = 32);

struct ExtremalData {
  double q_bar_min;
  double q_bar_max;
  OdeState t_min0;
  OdeState t_max0;
};

ExtremalData extremal_data(const StateVec& t0, const Forcing& forcing, int n_eval = 257);

}  // namespace ebm2
