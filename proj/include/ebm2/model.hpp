#pragma once

// Parameters, forcing and the nonlinear reaction term of the two-layer model
//
//   gamma_a dT_a/dt = gamma_a kappa_a A T_a + F_a(T_a, T_s)
//   gamma_s dT_s/dt = gamma_s kappa_s A T_s + F_s(T_a, T_s)
//
// with G = (F_a/gamma_a, F_s/gamma_s) evaluated pseudo-spectrally at the
// Gauss nodes. Defaults are nondimensional (sigma_b = 1, unit insolation).

#include <span>
#include <string>
#include <vector>

#include "ebm2/kernels.hpp"
#include "ebm2/legendre.hpp"

namespace ebm2 {

struct ModelParams {
  double gamma_a = 1.0;
  double gamma_s = 2.0;
  double kappa_a = 0.2;
  double kappa_s = 0.1;
  double sigma_b = 1.0;
  double eps_a = 1.0;
  double lambda = 0.5;
  // Permits eps_a = 0 so that lambda = 0 splits the system into two scalar
  // equations (scalar comparison path). Off by default.
  bool decoupled = false;
};

/// Which parts of F are active. `coupling_only` keeps the linear lambda
/// exchange; `none` gives pure diffusion.
enum class ReactionTerms { full, coupling_only, none };

/// Constant coalbedo or a cubic-smoothstep ramp from (t_low, beta_min) to
/// (t_high, beta_max).
struct Coalbedo {
  enum class Kind { constant, ramp };
  Kind kind = Kind::constant;
  double beta_min = 0.0;
  double beta_max = 0.0;
  double t_low = 0.0;
  double t_high = 1.0;

  static Coalbedo constant(double b);
  static Coalbedo ramp(double beta_min, double beta_max, double t_low, double t_high);

  double value(double u) const;
  /// Derivative; the smoothstep is C^1 so the one-sided choice at the kinks
  /// is the common value 0.
  double slope(double u) const;
  double sup() const;
  /// 1.5 (beta_max - beta_min)/(t_high - t_low) for the ramp, 0 for constants.
  double lipschitz() const;
  bool is_zero() const;
  kernels::RampCoeffs kernel_coeffs() const;
};

/// Insolation shape q(x).
struct QShape {
  enum class Kind { constant, p2, bump, nodal };
  Kind kind = Kind::constant;
  double q0 = 1.0;
  double s2 = 0.0;      // p2: q0 (1 + s2 P_2(x))
  double center = 0.0;  // bump: q0 exp(1 - 1/(1 - z^2)), z = (x - center)/width
  double width = 0.5;
  std::vector<double> nodal;  // kind = nodal: values at the grid nodes

  static QShape constant_shape(double q0);
  static QShape make_p2(double q0, double s2);
  static QShape make_bump(double q0, double center, double width);

  double value(double x) const;
  double min_value() const;
  double max_value() const;
};

struct Forcing {
  enum class RKind { constant, sinusoidal };

  GridPtr grid;
  QShape shape;
  std::vector<double> q_nodal;  // cache of q at the Gauss nodes
  SpectralField q;              // its Legendre projection
  RKind r_kind = RKind::constant;
  double r0 = 1.0;
  double r_delta = 0.0;
  double r_omega = 0.0;
  Coalbedo beta_a = Coalbedo::constant(0.0);
  Coalbedo beta_s = Coalbedo::constant(1.0);

  /// Builds the nodal cache for `shape` on `grid`.
  static Forcing make(GridPtr grid, QShape shape = {});

  double r(double t) const;
  double r_min() const;
  double r_max() const;
  double r_lipschitz() const;
  bool autonomous() const { return r_kind == RKind::constant || r_delta == 0.0; }
  /// Exact bounds of q on [-1, 1] (not just at nodes).
  double q_min() const;
  double q_max() const;
};

struct StateVec {
  SpectralField t_a;
  SpectralField t_s;

  StateVec() = default;
  StateVec(SpectralField a, SpectralField s);
  explicit StateVec(const GridPtr& g);
  static StateVec constant(const GridPtr& g, double a, double s);
  /// Packed [a coeffs | s coeffs].
  static StateVec from_packed(const GridPtr& g, std::span<const double> packed);
  std::vector<double> packed() const;
  const GridPtr& grid() const { return t_a.grid; }
};

/// Violated conditions on the parameters; empty when everything holds.
/// Each entry reads "<group>: <condition>", e.g. "params: eps_a > 0".
std::vector<std::string> validate(const ModelParams& params, const Forcing& forcing);

struct NodalJacobian {
  std::vector<double> daa, das, dsa, dss;  // dG_a/dT_a, dG_a/dT_s, dG_s/dT_a, dG_s/dT_s
};

/// Reaction evaluator bound to one parameter set.
class Model {
 public:
  Model(ModelParams params, Forcing forcing, ReactionTerms terms = ReactionTerms::full);

  const ModelParams& params() const noexcept { return params_; }
  const Forcing& forcing() const noexcept { return forcing_; }
  const GridPtr& grid() const noexcept { return forcing_.grid; }
  ReactionTerms terms() const noexcept { return terms_; }
  const kernels::ReactionCoeffs& coeffs() const noexcept { return coeffs_; }

  /// G at the nodes. Throws OverflowError on a non-finite value.
  void nodal_G(double t, std::span<const double> ua, std::span<const double> us,
               std::span<double> ga, std::span<double> gs) const;
  StateVec eval_G(double t, const StateVec& state) const;
  /// Packed-coefficient version used by the integrators.
  void eval_G_packed(double t, std::span<const double> packed, std::span<double> out) const;
  NodalJacobian eval_G_jacobian(const StateVec& state, double t) const;
  /// Lipschitz constant of t -> G(t, u) in H, uniform in u.
  double g_time_lipschitz_bound() const;

 private:
  ModelParams params_;
  Forcing forcing_;
  ReactionTerms terms_;
  kernels::ReactionCoeffs coeffs_;
};

StateVec eval_G(double t, const StateVec& state, const ModelParams& params,
                const Forcing& forcing);
NodalJacobian eval_G_jacobian(const StateVec& state, double t, const ModelParams& params,
                              const Forcing& forcing);
double g_time_lipschitz_bound(const Forcing& forcing, const ModelParams& params);

}  // namespace ebm2
