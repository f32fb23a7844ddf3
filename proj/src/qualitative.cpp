#include "ebm2/qualitative.hpp"

#include <algorithm>
#include <cmath>

#include "ebm2/errors.hpp"

namespace ebm2 {

double order_tolerance(double scale) { return std::max(1e-8 * std::abs(scale), 1e-10); }

OdeSystem ode_system(const Model& model, double q_bar) {
  OdeSystem sys;
  sys.params = model.params();
  sys.q_bar = q_bar;
  sys.beta_a = model.forcing().beta_a;
  sys.beta_s = model.forcing().beta_s;
  if (model.terms() != ReactionTerms::full) {
    // Same reduced physics as the PDE model.
    sys.params.eps_a = 0.0;
    sys.params.sigma_b = 0.0;
    sys.beta_a = sys.beta_s = Coalbedo::constant(0.0);
    if (model.terms() == ReactionTerms::none) sys.params.lambda = 0.0;
  }
  return sys;
}

namespace {

double max_sup(const TrajectoryRecord& r) {
  double m = 0.0;
  for (double s : r.sup_norms)
    if (std::isfinite(s)) m = std::max(m, s);
  return m;
}

void note_violation(OrderingReport& rep, double value, double t) {
  if (value < rep.max_violation) rep.max_violation = value;
  if (value < -rep.tolerance && !rep.first_violation_time) rep.first_violation_time = t;
}

void finish(OrderingReport& rep) { rep.passed = rep.max_violation >= -rep.tolerance; }

}  // namespace

OrderingReport compare_records(const TrajectoryRecord& low, const TrajectoryRecord& high) {
  OrderingReport rep;
  rep.scale = 1.0 + std::max(max_sup(low), max_sup(high));
  rep.tolerance = order_tolerance(rep.scale);
  std::size_t i = 0, j = 0, matched = 0;
  while (i < low.times.size() && j < high.times.size()) {
    if (low.times[i] < high.times[j]) {
      ++i;
      continue;
    }
    if (high.times[j] < low.times[i]) {
      ++j;
      continue;
    }
    const auto la = synthesize(low.states[i].t_a), ls = synthesize(low.states[i].t_s);
    const auto ha = synthesize(high.states[j].t_a), hs = synthesize(high.states[j].t_s);
    for (std::size_t k = 0; k < la.size(); ++k) {
      note_violation(rep, ha[k] - la[k], low.times[i]);
      note_violation(rep, hs[k] - ls[k], low.times[i]);
    }
    ++matched;
    ++i;
    ++j;
  }
  if (matched == 0) rep.note = "no common recorded times";
  finish(rep);
  return rep;
}

OrderingReport check_comparison(const StateVec& low, const StateVec& high, const Model& model,
                                double t_max, const StepControls& controls) {
  const auto la = synthesize(low.t_a), ls = synthesize(low.t_s);
  const auto ha = synthesize(high.t_a), hs = synthesize(high.t_s);
  for (std::size_t k = 0; k < la.size(); ++k)
    if (ha[k] < la[k] || hs[k] < ls[k])
      throw InputError("check_comparison: initial data are not ordered at every node");
  const auto rl = integrate(low, model, t_max, controls);
  const auto rh = integrate(high, model, t_max, controls);
  auto rep = compare_records(rl, rh);
  if (rl.status != RunStatus::completed || rh.status != RunStatus::completed)
    rep.note = std::string("runs ended as ") + to_string(rl.status) + "/" + to_string(rh.status);
  return rep;
}

OrderingReport check_positivity(const TrajectoryRecord& record, bool strict, double t_strict) {
  OrderingReport rep;
  rep.scale = 1.0 + max_sup(record);
  rep.tolerance = order_tolerance(rep.scale);
  double strict_min = INFINITY;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const auto a = synthesize(record.states[i].t_a), s = synthesize(record.states[i].t_s);
    double m = INFINITY;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::min({m, a[k], s[k]});
    note_violation(rep, m, record.times[i]);
    if (record.times[i] >= t_strict) strict_min = std::min(strict_min, m);
  }
  finish(rep);
  if (strict) {
    if (!(strict_min > 0.0)) {
      rep.passed = false;
      rep.note = "not strictly positive after t_strict";
    } else {
      rep.note = "strict minimum " + std::to_string(strict_min);
    }
  }
  return rep;
}

OrderingReport check_positivity(const TrajectoryRecord& record, const Forcing& forcing,
                                double t_strict) {
  return check_positivity(record, forcing.q_min() > 0.0, t_strict);
}

OrderingReport check_rectangle(const TrajectoryRecord& record, const InvariantRectangle& rect) {
  OrderingReport rep;
  const double ma = rect.m, ms = rect.mu * rect.m;
  rep.scale = ms;
  rep.tolerance = order_tolerance(ms);
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const auto a = synthesize(record.states[i].t_a), s = synthesize(record.states[i].t_s);
    double m = INFINITY;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::min({m, a[k], ma - a[k], s[k], ms - s[k]});
    if (i == 0 && m < -rep.tolerance)
      throw InputError("check_rectangle: initial state is outside the rectangle");
    note_violation(rep, m, record.times[i]);
  }
  finish(rep);
  return rep;
}

OrderingReport check_sandwich(const TrajectoryRecord& record, const Model& model,
                              double ode_tol) {
  if (record.states.empty()) throw InputError("check_sandwich: empty record");
  const auto ex = extremal_data(record.states.front(), model.forcing());
  const OdeSystem lo_sys = ode_system(model, ex.q_bar_min);
  const OdeSystem hi_sys = ode_system(model, ex.q_bar_max);
  OrderingReport rep;
  rep.scale = 1.0 + max_sup(record);
  rep.tolerance = order_tolerance(rep.scale);

  OdeState lo = ex.t_min0, hi = ex.t_max0;
  bool lo_alive = true, hi_alive = true;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    if (i > 0) {
      const double dt = record.times[i] - record.times[i - 1];
      // The companion system is autonomous, so each interval restarts at 0.
      if (lo_alive) {
        const auto tr = integrate_ode(lo, lo_sys, dt, ode_tol);
        lo_alive = !tr.blew_up;
        lo = tr.states.back();
      }
      if (hi_alive) {
        const auto tr = integrate_ode(hi, hi_sys, dt, ode_tol);
        hi_alive = !tr.blew_up;
        hi = tr.states.back();
      }
    }
    const auto a = synthesize(record.states[i].t_a), s = synthesize(record.states[i].t_s);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (lo_alive) {
        note_violation(rep, a[k] - lo.t_a, record.times[i]);
        note_violation(rep, s[k] - lo.t_s, record.times[i]);
      }
      if (hi_alive) {
        note_violation(rep, hi.t_a - a[k], record.times[i]);
        note_violation(rep, hi.t_s - s[k], record.times[i]);
      }
    }
  }
  if (!hi_alive) rep.note = "upper ODE solution escaped; upper bound checked up to its escape";
  finish(rep);
  return rep;
}

OrderingReport check_sandwich(const StateVec& t0, const Model& model, double t_max,
                              const StepControls& controls, double ode_tol) {
  return check_sandwich(integrate(t0, model, t_max, controls), model, ode_tol);
}

StateVec random_state(const GridPtr& grid, std::mt19937_64& rng, const RandomStateSpec& spec) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateVec s(grid);
  const int top = std::min(spec.max_mode, grid->n_modes() - 1);
  for (SpectralField* f : {&s.t_a, &s.t_s}) {
    f->coeffs[0] = (f == &s.t_a ? spec.mean_a : spec.mean_s) + spec.mean_jitter * u(rng);
    for (int n = 1; n <= top; ++n) f->coeffs[n] = spec.amp * u(rng) / ((n + 1.0) * (n + 1.0));
    if (spec.floor) {
      const double m = dense_range(*f).min;
      if (m < *spec.floor) f->coeffs[0] += *spec.floor - m;
    }
  }
  return s;
}

}  // namespace ebm2
