#pragma once

// Numerical checks of the qualitative theory: ordering (comparison,
// positivity, invariant rectangles, ODE sandwich), stationary solutions, and
// energy/absorbing-set diagnostics.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ebm2/integrator.hpp"
#include "ebm2/model.hpp"
#include "ebm2/ode_box.hpp"

namespace ebm2 {

/// Absolute ordering tolerance 1e-8 scale with a floor of 1e-10.
double order_tolerance(double scale);

struct OrderingReport {
  double max_violation = 0.0;  // most negative ordered difference seen
  std::optional<double> first_violation_time;
  bool passed = true;
  double tolerance = 0.0;
  double scale = 1.0;
  std::string note;
};

OrderingReport check_comparison(const StateVec& low, const StateVec& high, const Model& model,
                                double t_max, const StepControls& controls);

/// Ordering of two finished records at their common recorded times.
OrderingReport compare_records(const TrajectoryRecord& low, const TrajectoryRecord& high);

/// Nonnegativity at all recorded nodes; with `strict`, min > 0 for t >= t_strict.
OrderingReport check_positivity(const TrajectoryRecord& record, bool strict,
                                double t_strict = 0.1);
/// strict iff q_min > 0.
OrderingReport check_positivity(const TrajectoryRecord& record, const Forcing& forcing,
                                double t_strict = 0.1);

OrderingReport check_rectangle(const TrajectoryRecord& record, const InvariantRectangle& rect);

/// ODE(q_bar_min, T^min0) <= T(t, x) <= ODE(q_bar_max, T^max0) at recorded points.
OrderingReport check_sandwich(const StateVec& t0, const Model& model, double t_max,
                              const StepControls& controls, double ode_tol = 1e-12);
OrderingReport check_sandwich(const TrajectoryRecord& record, const Model& model,
                              double ode_tol = 1e-12);

OdeSystem ode_system(const Model& model, double q_bar);

// ---------------------------------------------------------------- equilibria

enum class EquilibriumMethod { monotone, newton, monotone_newton, relaxation_newton };
const char* to_string(EquilibriumMethod m);

struct EquilibriumSolution {
  StateVec state;
  double residual_h = 0.0;
  EquilibriumMethod method = EquilibriumMethod::newton;
  int iterations = 0;
  bool nonnegative = true;
  // Phase-1 monotonicity: largest increase (warmest seed) or decrease
  // (coldest seed) between recorded times, and whether it stayed in tolerance.
  double monotone_violation = 0.0;
  bool monotone_warning = false;
  std::vector<double> phase1_times;
};

struct EquilibriumSeed {
  enum class Kind { warmest, coldest, custom };
  Kind kind = Kind::warmest;
  std::optional<StateVec> state;  // custom only
};

struct EquilibriumOptions {
  double phase1_residual = 1e-6;
  double phase1_t_limit = 2000.0;
  double phase1_record_every = 0.5;
  StepControls controls{.dt_init = 1e-3, .rel_tol = 1e-10};
  double newton_tol = 1e-9;
  int newton_max_iter = 50;
};

/// H-norm of kappa A T + G(T).
double stationary_residual(const StateVec& state, const Model& model, double t = 0.0);

/// Newton on kappa A T + G(T) = 0 with the analytic Jacobian.
EquilibriumSolution newton_equilibrium(const StateVec& start, const Model& model,
                                       const EquilibriumOptions& opt = {});
EquilibriumSolution solve_equilibrium(const Model& model, const EquilibriumSeed& seed,
                                      const EquilibriumOptions& opt = {});

// ---------------------------------------------------------------- energies

struct EnergyRow {
  double t;
  double e_h;
  double e_v;
  double de_v_dt_numeric;
  double de_v_dt_formula;
  double identity_rhs;
  double identity_residual;
};

/// Centered-difference energy diagnostics at the interior recorded times.
std::vector<EnergyRow> energy_series(const TrajectoryRecord& record, const Model& model);
/// dE_V/dt = sum_c [-2 gamma_c ||dT_c/dt||^2 + 2 (F_c, dT_c/dt)].
double de_v_dt_formula(const StateVec& state, const Model& model, double t);
/// Pointwise sum of T_a F_a + T_s F_s integrated by quadrature.
double energy_identity_rhs(const StateVec& state, const Model& model, double t);

struct DissipationResult {
  bool applicable = false;
  double tau0 = 0.0;
  double n_bound = 0.0;
  bool holds = false;
  double worst_margin = 0.0;  // max of E_V - bound (<= 0 when holding)
};

DissipationResult dissipation_check(const TrajectoryRecord& record, const Model& model,
                                    double sigma);

struct AbsorbReport {
  std::vector<double> entry_times;  // +inf when a trajectory never entered
  double c0 = 0.0;
  double e_v_bound = 0.0;
  bool stayed_in = false;
  double diameter_early = 0.0;  // H-diameter of the ensemble at t_early
  double diameter_final = 0.0;  // at t_max
  double t_early = 0.0;
};

/// Integrates the ensemble (in parallel) and tests entry into
/// U = {E_H <= C0, E_V <= L1}.
AbsorbReport absorbing_probe(const std::vector<StateVec>& ensemble, const Model& model,
                             double t_max, double l1, const StepControls& controls,
                             double t_early, unsigned jobs = 0);

// ---------------------------------------------------------------- random data

/// Smooth random states: mean levels plus Legendre modes 1..max_mode with
/// amplitudes amp/(n+1)^2. Values are clamped below at `floor` by shifting.
struct RandomStateSpec {
  double mean_a = 1.0;
  double mean_s = 1.0;
  double mean_jitter = 0.2;
  double amp = 0.3;
  int max_mode = 6;
  std::optional<double> floor;  // shift up so the dense minimum is >= floor
};

StateVec random_state(const GridPtr& grid, std::mt19937_64& rng, const RandomStateSpec& spec);

}  // namespace ebm2
