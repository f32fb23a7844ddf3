#include "ebm2/ode_box.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ddtime.hpp"
#include "ebm2/errors.hpp"

namespace ebm2 {

OdeState ode_rhs(double /*t*/, const OdeState& y, const OdeSystem& sys) {
  const ModelParams& p = sys.params;
  const double a = y.t_a, s = y.t_s;
  const double pa = std::abs(a) * std::abs(a) * std::abs(a) * a;
  const double ps = std::abs(s) * std::abs(s) * std::abs(s) * s;
  const double es = p.eps_a * p.sigma_b;
  const double exch = p.lambda * (a - s);
  OdeState d;
  d.t_a = (-exch + es * ps - 2.0 * es * pa + sys.q_bar * sys.beta_a.value(a)) / p.gamma_a;
  d.t_s = (exch - p.sigma_b * ps + es * pa + sys.q_bar * sys.beta_s.value(s)) / p.gamma_s;
  if (!std::isfinite(d.t_a) || !std::isfinite(d.t_s)) throw OverflowError("ode_rhs: non-finite");
  return d;
}

namespace {

using detail::DDTime;

OdeState add(const OdeState& y, double h, std::initializer_list<std::pair<double, const OdeState*>> ks) {
  OdeState r = y;
  for (const auto& [c, k] : ks) {
    r.t_a += h * c * k->t_a;
    r.t_s += h * c * k->t_s;
  }
  return r;
}

bool finite(const OdeState& y) { return std::isfinite(y.t_a) && std::isfinite(y.t_s); }
double amax(const OdeState& y) { return std::max(std::abs(y.t_a), std::abs(y.t_s)); }

struct DPStep {
  OdeState y;
  OdeState err;
  OdeState k7;
  bool ok;
};

OdeState safe_rhs(const OdeState& y, const OdeSystem& sys, bool& ok) {
  if (!finite(y)) {
    ok = false;
    return {};
  }
  try {
    return ode_rhs(0.0, y, sys);
  } catch (const OverflowError&) {
    ok = false;
    return {};
  }
}

DPStep dp_step(const OdeState& y, const OdeState& k1, double h, const OdeSystem& sys) {
  bool ok = true;
  const OdeState k2 = safe_rhs(add(y, h, {{1.0 / 5, &k1}}), sys, ok);
  const OdeState k3 = safe_rhs(add(y, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}), sys, ok);
  const OdeState k4 =
      safe_rhs(add(y, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}), sys, ok);
  const OdeState k5 = safe_rhs(
      add(y, h, {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3},
                 {-212.0 / 729, &k4}}),
      sys, ok);
  const OdeState k6 = safe_rhs(
      add(y, h, {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3},
                 {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}}),
      sys, ok);
  const OdeState yn = add(y, h, {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4},
                                 {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
  const OdeState k7 = safe_rhs(yn, sys, ok);
  const OdeState e = add(OdeState{}, h,
                         {{71.0 / 57600, &k1}, {-71.0 / 16695, &k3}, {71.0 / 1920, &k4},
                          {-17253.0 / 339200, &k5}, {22.0 / 525, &k6}, {-1.0 / 40, &k7}});
  return {yn, e, k7, ok && finite(yn) && finite(e)};
}

double initial_step(const OdeState& y, const OdeState& f, double tol, double span) {
  const double d0 = amax(y) + 1.0;
  const double d1 = amax(f);
  double h = d1 > 0.0 ? 0.01 * d0 / d1 : 1e-3;
  h *= std::pow(std::max(tol, 1e-16) / 1e-6, 0.2);
  return std::min(h, span);
}

}  // namespace

OdeTrajectory integrate_ode(const OdeState& y0, const OdeSystem& sys, double t_max, double tol,
                            const OdeOptions& opt) {
  if (!(tol > 0.0)) throw DomainError("integrate_ode: tol must be > 0");
  if (!(t_max >= 0.0)) throw DomainError("integrate_ode: t_max must be >= 0");
  if (!finite(y0)) throw InputError("integrate_ode: non-finite initial state");

  OdeTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(y0);
  if (t_max == 0.0) return traj;

  OdeState y = y0;
  OdeState k1 = ode_rhs(0.0, y, sys);
  double h = opt.dt_init > 0.0 ? opt.dt_init : initial_step(y, k1, tol, t_max);
  DDTime t;
  long next_record = 1;
  long steps = 0;

  auto record = [&](double time, const OdeState& s) {
    if (time > traj.times.back()) {
      traj.times.push_back(time);
      traj.states.push_back(s);
    } else {
      traj.states.back() = s;
    }
  };

  while (t.minus(t_max) < 0.0) {
    if (++steps > opt.max_steps) throw StiffnessError("integrate_ode: step budget exhausted");
    double target = t_max;
    if (opt.record_every > 0.0) target = std::min(t_max, next_record * opt.record_every);
    const double remaining = -t.minus(target);
    const bool clipped = remaining <= h;
    const double h_try = clipped ? remaining : h;

    const DPStep st = dp_step(y, k1, h_try, sys);
    double err = INFINITY;
    if (st.ok) {
      const double sa = tol * (1.0 + std::max(std::abs(y.t_a), std::abs(st.y.t_a)));
      const double ss = tol * (1.0 + std::max(std::abs(y.t_s), std::abs(st.y.t_s)));
      err = std::max(std::abs(st.err.t_a) / sa, std::abs(st.err.t_s) / ss);
    }
    if (!(err <= 1.0)) {
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h = h_try * fac;
      if (h < opt.dt_min) throw StiffnessError("integrate_ode: step size underflow");
      continue;
    }

    if (amax(st.y) > opt.blowup_threshold) {
      const double t0 = t.hi + t.lo;
      double lo = 0.0, hi = h_try;
      OdeState y_hi = st.y;
      for (int it = 0; it < 200 && hi - lo > 1e-6 * (t0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const DPStep m = dp_step(y, k1, mid, sys);
        if (!m.ok || amax(m.y) > opt.blowup_threshold) {
          hi = mid;
          if (m.ok) y_hi = m.y;
        } else {
          lo = mid;
        }
      }
      traj.blew_up = true;
      traj.t_star_bracket = std::make_pair(t0 + lo, t0 + hi);
      record(t0 + hi, y_hi);
      return traj;
    }

    y = st.y;
    k1 = st.k7;
    t.add(h_try);
    if (clipped) {
      t = DDTime{target, 0.0};
      if (opt.record_every > 0.0 && target < t_max) ++next_record;
    }
    if (opt.record_every <= 0.0 || clipped) record(t.hi, y);

    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    const double h_new = h_try * fac;
    h = clipped ? std::max(h, h_new) : h_new;
    if (h < opt.dt_min) throw StiffnessError("integrate_ode: step size underflow");
  }
  return traj;
}

OdeState sample(const OdeTrajectory& traj, double t) {
  const auto& ts = traj.times;
  if (ts.empty()) throw InputError("sample: empty trajectory");
  if (t <= ts.front()) return traj.states.front();
  if (t >= ts.back()) return traj.states.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t i = std::size_t(it - ts.begin());
  const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  const OdeState& a = traj.states[i - 1];
  const OdeState& b = traj.states[i];
  return {a.t_a + w * (b.t_a - a.t_a), a.t_s + w * (b.t_s - a.t_s)};
}

namespace {

void check_equilibrium_domain(const OdeSystem& sys) {
  const double e = sys.params.eps_a;
  if (!(e > 0.0 && e < 2.0)) throw DomainError("equilibria: eps_a must lie in (0, 2)");
  if (!sys.beta_a.is_zero() && !sys.experimental)
    throw UnsupportedError("equilibria: beta_a != 0 is only available in experimental mode");
}

// Root of an increasing g on [lo, hi] with g(lo) <= 0 <= g(hi), bisected to
// the last representable split.
template <class F>
double bisect(F&& g, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double nullcline_phi(const OdeSystem& sys, double t_s) {
  const ModelParams& p = sys.params;
  const double es = p.eps_a * p.sigma_b;
  const double ps = std::abs(t_s) * std::abs(t_s) * std::abs(t_s) * t_s;
  const double target = p.lambda * t_s + es * ps;
  auto g = [&](double x) {
    return p.lambda * x + 2.0 * es * std::abs(x) * std::abs(x) * std::abs(x) * x -
           sys.q_bar * sys.beta_a.value(x) - target;
  };
  if (target == 0.0 && sys.beta_a.is_zero()) return 0.0;
  // Without beta_a the root lies between 0 and T_s (the map is increasing and
  // dominates its right-hand side at x = T_s).
  double lo = std::min(0.0, t_s), hi = std::max(0.0, t_s);
  if (!sys.beta_a.is_zero()) {
    hi = std::max(hi, 1.0);
    while (g(hi) < 0.0) hi *= 2.0;
    while (g(lo) > 0.0) lo = lo * 2.0 - 1.0;
  }
  return bisect(g, lo, hi);
}

double equilibrium_residual(const OdeSystem& sys, double t_s) {
  const ModelParams& p = sys.params;
  const double phi = nullcline_phi(sys, t_s);
  const double p4 = std::abs(phi) * std::abs(phi) * std::abs(phi) * phi;
  const double s4 = std::abs(t_s) * std::abs(t_s) * std::abs(t_s) * t_s;
  const double r = -p.lambda * (t_s - phi) - p.sigma_b * s4 + p.eps_a * p.sigma_b * p4 +
                   sys.q_bar * sys.beta_s.value(t_s);
  if (!std::isfinite(r)) throw OverflowError("equilibrium residual is non-finite");
  return r;
}

double default_search_max(const OdeSystem& sys) {
  const ModelParams& p = sys.params;
  return 10.0 * std::pow(sys.q_bar * sys.beta_s.sup() / (p.sigma_b * (2.0 - p.eps_a)), 0.25);
}

std::vector<OdeState> find_equilibria(const OdeSystem& sys, double search_max) {
  check_equilibrium_domain(sys);
  if (search_max <= 0.0) search_max = default_search_max(sys);
  std::vector<OdeState> roots;
  auto push = [&](double ts) { roots.push_back({nullcline_phi(sys, ts), ts}); };
  if (search_max == 0.0) {
    if (equilibrium_residual(sys, 0.0) == 0.0) push(0.0);
    return roots;
  }
  constexpr int kScan = 10000;
  double x0 = 0.0;
  double r0 = equilibrium_residual(sys, x0);
  if (r0 == 0.0) push(x0);
  for (int i = 1; i <= kScan; ++i) {
    const double x1 = search_max * i / kScan;
    const double r1 = equilibrium_residual(sys, x1);
    if (r1 == 0.0) {
      push(x1);
    } else if (r0 != 0.0 && (r0 < 0.0) != (r1 < 0.0)) {
      const bool rising = r0 < 0.0;
      const double ts = bisect(
          [&](double x) {
            const double r = equilibrium_residual(sys, x);
            return rising ? r : -r;
          },
          x0, x1);
      push(ts);
    }
    x0 = x1;
    r0 = r1;
  }
  return roots;
}

OdeState warmest_equilibrium(const OdeSystem& sys) {
  const auto eq = find_equilibria(sys);
  if (eq.empty()) throw ConvergenceError("no equilibrium found in the search interval");
  return eq.back();
}

OdeState coldest_equilibrium(const OdeSystem& sys) {
  const auto eq = find_equilibria(sys);
  if (eq.empty()) throw ConvergenceError("no equilibrium found in the search interval");
  return eq.front();
}

bool rectangle_inward(const OdeSystem& sys, double m, double mu, int edge_points) {
  // T_a = m edge: rhs_a <= 0 for T_s in [0, mu m]; T_s = mu m edge: rhs_s <= 0
  // for T_a in [0, m]. Both are increasing along their edge, so the far corner
  // is the worst case; the grid covers any non-monotone coalbedo as well.
  for (int i = 0; i < edge_points; ++i) {
    const double f = double(i) / (edge_points - 1);
    if (ode_rhs(0.0, {m, f * mu * m}, sys).t_a > 0.0) return false;
    if (ode_rhs(0.0, {f * m, mu * m}, sys).t_s > 0.0) return false;
  }
  return true;
}

double rectangle_excursion(const OdeSystem& sys, const InvariantRectangle& rect, double t_max,
                           int n_seeds) {
  const double ma = rect.m, ms = rect.mu * rect.m;
  double worst = 0.0;
  for (int i = 0; i < n_seeds; ++i) {
    // Walk the perimeter counter-clockwise from the origin.
    const double u = 4.0 * i / n_seeds;
    const int edge = int(u);
    const double f = u - edge;
    OdeState y0;
    switch (edge) {
      case 0: y0 = {f * ma, 0.0}; break;
      case 1: y0 = {ma, f * ms}; break;
      case 2: y0 = {(1.0 - f) * ma, ms}; break;
      default: y0 = {0.0, (1.0 - f) * ms}; break;
    }
    const auto traj = integrate_ode(y0, sys, t_max, 1e-10);
    if (traj.blew_up) return INFINITY;
    for (const auto& s : traj.states) {
      worst = std::max({worst, (s.t_a - ma) / ma, (s.t_s - ms) / ms, -s.t_a / ma, -s.t_s / ms});
    }
  }
  return worst;
}

InvariantRectangle minimal_rectangle(const OdeSystem& sys, double mu, bool verify) {
  const double e = sys.params.eps_a;
  if (!(e > 0.0 && e < 2.0)) throw DomainError("minimal_rectangle: eps_a must lie in (0, 2)");
  const double mu4 = mu * mu * mu * mu;
  if (!(mu4 > e && mu4 < 2.0))
    throw DomainError("minimal_rectangle: mu must lie in (eps_a^(1/4), 2^(1/4))");

  double hi = 1e-6;
  while (!rectangle_inward(sys, hi, mu)) {
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceError("minimal_rectangle: no inward rectangle found");
  }
  double lo = hi / 2.0;
  if (hi > 1e-6) {
    // Walk down a grid over [hi/2, hi] to the last point that still holds.
    constexpr int kGrid = 64;
    double prev = hi;
    for (int i = kGrid - 1; i >= 0; --i) {
      const double m = lo + (hi - lo) * i / kGrid;
      if (!rectangle_inward(sys, m, mu)) {
        lo = m;
        break;
      }
      prev = m;
    }
    hi = prev;
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (rectangle_inward(sys, mid, mu))
        hi = mid;
      else
        lo = mid;
    }
  }
  InvariantRectangle rect;
  rect.m = hi;
  rect.mu = mu;
  rect.range_warning = hi > 1e6;
  if (verify) {
    rect.worst_excursion = rectangle_excursion(sys, rect, 100.0);
    rect.verified = rect.worst_excursion <= 1e-8;
  }
  return rect;
}

ExtremalData extremal_data(const StateVec& t0, const Forcing& forcing, int n_eval) {
  const Range ra = dense_range(t0.t_a, n_eval);
  const Range rs = dense_range(t0.t_s, n_eval);
  return {forcing.r_min() * forcing.q_min(), forcing.r_max() * forcing.q_max(), {ra.min, rs.min},
          {ra.max, rs.max}};
}

}  // namespace ebm2
