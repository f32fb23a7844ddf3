#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ebm2/errors.hpp"
#include "ebm2/qualitative.hpp"

namespace ebm2 {

const char* to_string(EquilibriumMethod m) {
  switch (m) {
    case EquilibriumMethod::monotone: return "monotone";
    case EquilibriumMethod::newton: return "newton";
    case EquilibriumMethod::monotone_newton: return "monotone+newton";
    case EquilibriumMethod::relaxation_newton: return "relaxation+newton";
  }
  return "unknown";
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// kappa A u + G(u) in packed coefficients.
void stationary_rhs(const Model& model, double t, std::span<const double> u,
                    std::span<double> out) {
  const SpectralGrid& g = *model.grid();
  const std::size_t n = g.n_modes();
  model.eval_G_packed(t, u, out);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] -= model.params().kappa_a * g.eig()[i] * u[i];
    out[n + i] -= model.params().kappa_s * g.eig()[i] * u[n + i];
  }
}

double packed_h(std::span<const double> u, const SpectralGrid& g) {
  const std::size_t n = g.n_modes();
  const double a = h_norm(u.subspan(0, n), g), s = h_norm(u.subspan(n, n), g);
  return std::sqrt(a * a + s * s);
}

bool nodally_nonnegative(const StateVec& s) {
  for (double v : synthesize(s.t_a))
    if (v < -1e-10) return false;
  for (double v : synthesize(s.t_s))
    if (v < -1e-10) return false;
  return true;
}

void require_autonomous_theory(const Model& model) {
  const double e = model.params().eps_a;
  if (!(e > 0.0 && e < 2.0)) throw DomainError("solve_equilibrium: eps_a must lie in (0, 2)");
  if (!model.forcing().beta_a.is_zero())
    throw UnsupportedError("solve_equilibrium: requires beta_a = 0");
  if (!model.forcing().autonomous())
    throw UnsupportedError("solve_equilibrium: requires constant r(t)");
}

}  // namespace

double stationary_residual(const StateVec& state, const Model& model, double t) {
  const auto u = state.packed();
  std::vector<double> f(u.size());
  stationary_rhs(model, t, u, f);
  return packed_h(f, *model.grid());
}

EquilibriumSolution newton_equilibrium(const StateVec& start, const Model& model,
                                       const EquilibriumOptions& opt) {
  const SpectralGrid& g = *model.grid();
  const int n = g.n_modes(), q = g.n_quad();
  const Eigen::Map<const RowMat> analysis(g.analysis().data(), n, q);
  const Eigen::Map<const RowMat> synthesis(g.synthesis().data(), q, n);

  std::vector<double> u = start.packed(), f(2 * n), trial(2 * n), f_trial(2 * n);
  stationary_rhs(model, 0.0, u, f);
  double fn = packed_h(f, g);

  EquilibriumSolution sol;
  sol.method = EquilibriumMethod::newton;
  for (int it = 0;; ++it) {
    if (fn <= opt.newton_tol * (1.0 + packed_h(u, g))) {
      sol.iterations = it;
      break;
    }
    if (it >= opt.newton_max_iter)
      throw ConvergenceError("newton_equilibrium: no convergence in " +
                             std::to_string(opt.newton_max_iter) +
                             " iterations (best residual " + std::to_string(fn) + ")");

    const StateVec cur = StateVec::from_packed(model.grid(), u);
    const NodalJacobian jac = model.eval_G_jacobian(cur, 0.0);
    // Block (c, d) = analysis * diag(dG_c/dT_d) * synthesis, i.e. the
    // multiplication operator projected back onto the modes.
    Eigen::MatrixXd J(2 * n, 2 * n);
    const std::vector<double>* blocks[2][2] = {{&jac.daa, &jac.das}, {&jac.dsa, &jac.dss}};
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d) {
        const Eigen::Map<const Eigen::VectorXd> w(blocks[c][d]->data(), q);
        J.block(c * n, d * n, n, n) = analysis * w.asDiagonal() * synthesis;
      }
    for (int i = 0; i < n; ++i) {
      J(i, i) -= model.params().kappa_a * g.eig()[i];
      J(n + i, n + i) -= model.params().kappa_s * g.eig()[i];
    }
    const Eigen::Map<const Eigen::VectorXd> fv(f.data(), 2 * n);
    const Eigen::VectorXd delta = J.partialPivLu().solve(-fv);

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      for (int i = 0; i < 2 * n; ++i) trial[i] = u[i] + alpha * delta[i];
      double ft = INFINITY;
      try {
        stationary_rhs(model, 0.0, trial, f_trial);
        ft = packed_h(f_trial, g);
      } catch (const OverflowError&) {
      }
      if (ft <= (1.0 - 1e-4 * alpha) * fn) {
        u.swap(trial);
        f.swap(f_trial);
        fn = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw ConvergenceError("newton_equilibrium: line search stalled at residual " +
                             std::to_string(fn));
  }
  sol.state = StateVec::from_packed(model.grid(), u);
  sol.residual_h = fn;
  sol.nonnegative = nodally_nonnegative(sol.state);
  return sol;
}

namespace {

// Integrate until ||dT/dt||_H drops below the phase-1 threshold, recording the
// largest step-to-step move against the expected direction (+1: decreasing).
StateVec relax(const Model& model, StateVec state, const EquilibriumOptions& opt, int direction,
               EquilibriumSolution& sol) {
  StepControls ctl = opt.controls;
  ctl.record_every = opt.phase1_record_every;
  const double chunk = 20.0 * opt.phase1_record_every;
  double t0 = 0.0;
  double scale = 1.0 + state_sup_norm(state);
  sol.phase1_times.push_back(0.0);
  auto prev_a = synthesize(state.t_a), prev_s = synthesize(state.t_s);
  while (t0 < opt.phase1_t_limit) {
    const auto rec = integrate(state, model, chunk, ctl);
    if (rec.status != RunStatus::completed)
      throw ConvergenceError(std::string("relaxation run ended as ") + to_string(rec.status));
    for (std::size_t i = 1; i < rec.states.size(); ++i) {
      const auto a = synthesize(rec.states[i].t_a), s = synthesize(rec.states[i].t_s);
      scale = std::max(scale, 1.0 + rec.sup_norms[i]);
      if (direction != 0) {
        for (std::size_t k = 0; k < a.size(); ++k) {
          sol.monotone_violation =
              std::max({sol.monotone_violation, direction * (a[k] - prev_a[k]),
                        direction * (s[k] - prev_s[k])});
        }
      }
      prev_a = a;
      prev_s = s;
      sol.phase1_times.push_back(t0 + rec.times[i]);
      if (stationary_residual(rec.states[i], model) < opt.phase1_residual) {
        sol.monotone_warning = sol.monotone_violation > order_tolerance(scale);
        return rec.states[i];
      }
    }
    state = rec.states.back();
    t0 += chunk;
  }
  sol.monotone_warning = sol.monotone_violation > order_tolerance(scale);
  return state;
}

}  // namespace

EquilibriumSolution solve_equilibrium(const Model& model, const EquilibriumSeed& seed,
                                      const EquilibriumOptions& opt) {
  require_autonomous_theory(model);
  const Forcing& fc = model.forcing();
  EquilibriumSolution phase1;

  if (seed.kind == EquilibriumSeed::Kind::custom) {
    if (!seed.state) throw InputError("solve_equilibrium: custom seed needs a state");
    try {
      auto sol = newton_equilibrium(*seed.state, model, opt);
      if (sol.nonnegative) return sol;
    } catch (const ConvergenceError&) {
    } catch (const OverflowError&) {
    }
    const StateVec relaxed = relax(model, *seed.state, opt, 0, phase1);
    auto sol = newton_equilibrium(relaxed, model, opt);
    sol.method = EquilibriumMethod::relaxation_newton;
    sol.phase1_times = std::move(phase1.phase1_times);
    return sol;
  }

  const bool warm = seed.kind == EquilibriumSeed::Kind::warmest;
  // Constant ODE equilibria at the extreme insolations are super/sub-solutions.
  const OdeSystem sys = ode_system(model, warm ? fc.r_max() * fc.q_max() : fc.r_min() * fc.q_min());
  const OdeState e = warm ? warmest_equilibrium(sys) : coldest_equilibrium(sys);
  const StateVec start = StateVec::constant(model.grid(), e.t_a, e.t_s);
  const StateVec relaxed = relax(model, start, opt, warm ? +1 : -1, phase1);

  EquilibriumSolution sol;
  if (stationary_residual(relaxed, model) <=
      opt.newton_tol * (1.0 + packed_h(relaxed.packed(), *model.grid()))) {
    sol.state = relaxed;
    sol.residual_h = stationary_residual(relaxed, model);
    sol.method = EquilibriumMethod::monotone;
    sol.nonnegative = nodally_nonnegative(relaxed);
  } else {
    sol = newton_equilibrium(relaxed, model, opt);
    sol.method = EquilibriumMethod::monotone_newton;
  }
  sol.monotone_violation = phase1.monotone_violation;
  sol.monotone_warning = phase1.monotone_warning;
  sol.phase1_times = std::move(phase1.phase1_times);
  return sol;
}

}  // namespace ebm2
