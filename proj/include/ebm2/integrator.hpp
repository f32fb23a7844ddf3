#pragma once

// Exponential time differencing in the Legendre eigenbasis. The diffusion is
// integrated exactly, so the step size is limited by the reaction term only.

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ebm2/model.hpp"

namespace ebm2 {

/// dT/dt = diag(kappa) A T + G(t, T) on packed coefficients [a | s].
struct Dynamics {
  using Reaction = std::function<void(double t, std::span<const double> packed,
                                      std::span<double> out)>;
  GridPtr grid;
  double kappa_a = 1.0;
  double kappa_s = 1.0;
  double gamma_a = 1.0;  // only used for the recorded energies
  double gamma_s = 1.0;
  Reaction reaction;  // empty: G = 0

  static Dynamics from_model(const Model& model);
};

struct StepControls {
  double dt_init = 1e-3;
  double rel_tol = 1e-7;
  double dt_min = 1e-30;
  double blowup_threshold = 1e8;
  double record_every = 0.1;
  int sup_eval = 129;
  long max_steps = 50'000'000;
};

enum class RunStatus { completed, blew_up, stiffness_failure };
const char* to_string(RunStatus s);

struct Energies {
  double e_h = 0.0;
  double e_v = 0.0;
};

/// E_H = sum gamma ||T||_H^2, E_V = sum gamma kappa int (1-x^2) T_x^2.
Energies energies(std::span<const double> packed, const Dynamics& dyn);
Energies energies(const StateVec& state, const ModelParams& params);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<StateVec> states;
  std::vector<Energies> energies;
  std::vector<double> sup_norms;  // max of both components
  std::vector<double> v_norms;
  RunStatus status = RunStatus::completed;
  std::optional<std::pair<double, double>> t_star_bracket;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, cancellation-safe.
double phi1(double z);
double phi2(double z);

/// One exponential step on packed coefficients.
void etd1_step(const Dynamics& dyn, double t, double dt, std::span<const double> u,
               std::span<double> out);
void etdrk2_step(const Dynamics& dyn, double t, double dt, std::span<const double> u,
                 std::span<double> out);

StateVec step_etd1(const StateVec& state, double t, double dt, const Model& model);
StateVec step_etdrk2(const StateVec& state, double t, double dt, const Model& model);

/// Adaptive ETDRK2 with step doubling; steps are clipped so that every
/// multiple of record_every is hit exactly and recorded.
TrajectoryRecord integrate(const StateVec& t0, const Dynamics& dyn, double t_max,
                           const StepControls& controls = {});
TrajectoryRecord integrate(const StateVec& t0, const Model& model, double t_max,
                           const StepControls& controls = {});

std::optional<std::pair<double, double>> detect_blowup(const TrajectoryRecord& record);

/// Discrete sup norm used for blow-up monitoring (both components).
double state_sup_norm(const StateVec& s, int n_eval = 129);

}  // namespace ebm2
