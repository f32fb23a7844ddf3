#include "ebm2/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddtime.hpp"
#include "ebm2/errors.hpp"
#include "ebm2/kernels.hpp"

namespace ebm2 {

Dynamics Dynamics::from_model(const Model& model) {
  Dynamics d;
  d.grid = model.grid();
  d.kappa_a = model.params().kappa_a;
  d.kappa_s = model.params().kappa_s;
  d.gamma_a = model.params().gamma_a;
  d.gamma_s = model.params().gamma_s;
  if (model.terms() != ReactionTerms::none) {
    const Model* m = &model;
    d.reaction = [m](double t, std::span<const double> u, std::span<double> out) {
      m->eval_G_packed(t, u, out);
    };
  }
  return d;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blew_up: return "blew_up";
    case RunStatus::stiffness_failure: return "stiffness_failure";
  }
  return "unknown";
}

Energies energies(std::span<const double> u, const Dynamics& dyn) {
  const SpectralGrid& g = *dyn.grid;
  const std::size_t n = g.n_modes();
  const auto a = u.subspan(0, n), s = u.subspan(n, n);
  const double ha = h_norm(a, g), hs = h_norm(s, g);
  return {dyn.gamma_a * ha * ha + dyn.gamma_s * hs * hs,
          dyn.gamma_a * dyn.kappa_a * dirichlet_form(a, g) +
              dyn.gamma_s * dyn.kappa_s * dirichlet_form(s, g)};
}

Energies energies(const StateVec& state, const ModelParams& params) {
  Dynamics d;
  d.grid = state.grid();
  d.kappa_a = params.kappa_a;
  d.kappa_s = params.kappa_s;
  d.gamma_a = params.gamma_a;
  d.gamma_s = params.gamma_s;
  return energies(state.packed(), d);
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z / 6.0);
  return std::expm1(z) / z;
}

double phi2(double z) {
  // The closed form loses about |log10 |z|| digits to cancellation, so the
  // series covers a wider window than phi1's.
  if (std::abs(z) < 0.5) {
    double term = 0.5, sum = 0.5;  // z^k/(k+2)!
    for (int k = 1; k < 16; ++k) {
      term *= z / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

namespace {

double decay_rate(const Dynamics& dyn, std::size_t i, std::size_t n) {
  const double kappa = i < n ? dyn.kappa_a : dyn.kappa_s;
  return -kappa * dyn.grid->eig()[i < n ? i : i - n];
}

void reaction(const Dynamics& dyn, double t, std::span<const double> u, std::span<double> out) {
  if (dyn.reaction)
    dyn.reaction(t, u, out);
  else
    std::fill(out.begin(), out.end(), 0.0);
}

}  // namespace

void etd1_step(const Dynamics& dyn, double t, double dt, std::span<const double> u,
               std::span<double> out) {
  if (!(dt > 0.0)) throw DomainError("etd1_step: dt must be > 0");
  const std::size_t n = dyn.grid->n_modes();
  std::vector<double> g(2 * n);
  reaction(dyn, t, u, g);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double z = decay_rate(dyn, i, n) * dt;
    out[i] = std::exp(z) * u[i] + dt * phi1(z) * g[i];
  }
}

void etdrk2_step(const Dynamics& dyn, double t, double dt, std::span<const double> u,
                 std::span<double> out) {
  if (!(dt > 0.0)) throw DomainError("etdrk2_step: dt must be > 0");
  const std::size_t n = dyn.grid->n_modes();
  std::vector<double> g0(2 * n), a(2 * n), g1(2 * n);
  reaction(dyn, t, u, g0);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double z = decay_rate(dyn, i, n) * dt;
    a[i] = std::exp(z) * u[i] + dt * phi1(z) * g0[i];
  }
  if (!dyn.reaction) {
    std::copy(a.begin(), a.end(), out.begin());
    return;
  }
  reaction(dyn, t + dt, a, g1);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double z = decay_rate(dyn, i, n) * dt;
    out[i] = a[i] + dt * phi2(z) * (g1[i] - g0[i]);
  }
}

StateVec step_etd1(const StateVec& state, double t, double dt, const Model& model) {
  const auto d = Dynamics::from_model(model);
  const auto u = state.packed();
  std::vector<double> out(u.size());
  etd1_step(d, t, dt, u, out);
  return StateVec::from_packed(state.grid(), out);
}

StateVec step_etdrk2(const StateVec& state, double t, double dt, const Model& model) {
  const auto d = Dynamics::from_model(model);
  const auto u = state.packed();
  std::vector<double> out(u.size());
  etdrk2_step(d, t, dt, u, out);
  return StateVec::from_packed(state.grid(), out);
}

double state_sup_norm(const StateVec& s, int n_eval) {
  return std::max(sup_norm(s.t_a, n_eval), sup_norm(s.t_s, n_eval));
}

namespace {

// Values at Chebyshev-Lobatto points for the blow-up monitor.
class SupMonitor {
 public:
  SupMonitor(const SpectralGrid& g, int n_eval) : n_(g.n_modes()), m_(n_eval) {
    const auto xs = lobatto_points(n_eval);
    mat_.resize(std::size_t(m_) * n_);
    for (int k = 0; k < m_; ++k) legendre_values(xs[k], int(n_), mat_.data() + k * n_);
    buf_.resize(m_);
  }
  double operator()(std::span<const double> u) {
    double best = 0.0;
    for (int c = 0; c < 2; ++c) {
      kernels::matvec(mat_, u.subspan(c * n_, n_), buf_);
      for (double v : buf_) {
        if (!std::isfinite(v)) return INFINITY;
        best = std::max(best, std::abs(v));
      }
    }
    return best;
  }

 private:
  std::size_t n_;
  int m_;
  std::vector<double> mat_, buf_;
};

}  // namespace

TrajectoryRecord integrate(const StateVec& t0, const Dynamics& dyn, double t_max,
                           const StepControls& c) {
  if (!dyn.grid || t0.grid() != dyn.grid) throw ConfigError("ic", "initial state is on another grid");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ConfigError("run.t_max", "must be >= 0");
  if (!(c.dt_init > 0.0)) throw ConfigError("run.dt_init", "must be > 0");
  if (!(c.rel_tol > 0.0)) throw ConfigError("run.rel_tol", "must be > 0");
  if (!(c.dt_min > 0.0 && c.dt_min < c.dt_init))
    throw ConfigError("run.dt_min", "must satisfy 0 < dt_min < dt_init");
  if (!(c.blowup_threshold > 0.0)) throw ConfigError("run.blowup_threshold", "must be > 0");
  if (!(c.record_every >= 0.0)) throw ConfigError("run.record_every", "must be >= 0");

  const SpectralGrid& g = *dyn.grid;
  const std::size_t n2 = 2 * std::size_t(g.n_modes());
  std::vector<double> u = t0.packed();
  for (double v : u)
    if (!std::isfinite(v)) throw ConfigError("ic", "initial state is not finite");

  SupMonitor monitor(g, std::max(64, c.sup_eval));
  TrajectoryRecord rec;
  auto vnorm = [&](std::span<const double> x) {
    const std::size_t n = g.n_modes();
    const double a = v_norm(x.subspan(0, n), g), s = v_norm(x.subspan(n, n), g);
    return std::sqrt(a * a + s * s);
  };
  auto record = [&](double time, std::span<const double> x, double sup) {
    if (!rec.times.empty() && !(time > rec.times.back())) {
      rec.times.pop_back();
      rec.states.pop_back();
      rec.energies.pop_back();
      rec.sup_norms.pop_back();
      rec.v_norms.pop_back();
    }
    rec.times.push_back(time);
    rec.states.push_back(StateVec::from_packed(dyn.grid, x));
    rec.energies.push_back(energies(x, dyn));
    rec.sup_norms.push_back(sup);
    rec.v_norms.push_back(vnorm(x));
  };
  record(0.0, u, monitor(u));

  std::vector<double> u1(n2), um(n2), u2(n2), trial(n2);
  detail::DDTime t;
  long next_record = 1;
  double dt = c.dt_init;

  auto reject = [&](double h, double fac) {
    ++rec.rejected_steps;
    dt = h * fac;
    return dt >= c.dt_min;
  };

  while (t.minus(t_max) < 0.0) {
    if (rec.accepted_steps + rec.rejected_steps > c.max_steps) {
      rec.status = RunStatus::stiffness_failure;
      return rec;
    }
    double target = t_max;
    if (c.record_every > 0.0) target = std::min(t_max, next_record * c.record_every);
    const double remaining = -t.minus(target);
    const bool clipped = remaining <= dt;
    const double h = clipped ? remaining : dt;
    const double tv = t.value();

    bool ok = true;
    try {
      etdrk2_step(dyn, tv, h, u, u1);
      etdrk2_step(dyn, tv, 0.5 * h, u, um);
      etdrk2_step(dyn, tv + 0.5 * h, 0.5 * h, um, u2);
    } catch (const OverflowError&) {
      ok = false;
    }
    double err = INFINITY, tol = 0.0;
    if (ok) {
      for (std::size_t i = 0; i < n2; ++i) trial[i] = u2[i] - u1[i];
      err = vnorm(trial);
      tol = c.rel_tol * (1.0 + vnorm(u2));
    }
    if (!(err <= tol)) {
      const double fac =
          std::isfinite(err) ? std::max(0.2, 0.9 * std::cbrt(tol / err)) : 0.2;
      if (!reject(h, fac)) {
        rec.status = RunStatus::stiffness_failure;
        return rec;
      }
      continue;
    }
    // Local extrapolation: the doubled step is second order, so (u2 - u1)/3
    // removes its leading local error term.
    for (std::size_t i = 0; i < n2; ++i) trial[i] = u2[i] + (u2[i] - u1[i]) / 3.0;
    const double sup = monitor(trial);

    if (!(sup <= c.blowup_threshold)) {
      // Bracket the crossing inside [tv, tv + h], probing with the same
      // extrapolated doubled step so that tau = h is known to cross.
      std::vector<double> p1(n2), pm(n2), p2(n2);
      auto crossed = [&](double tau, std::vector<double>& out) {
        try {
          etdrk2_step(dyn, tv, tau, u, p1);
          etdrk2_step(dyn, tv, 0.5 * tau, u, pm);
          etdrk2_step(dyn, tv + 0.5 * tau, 0.5 * tau, pm, p2);
        } catch (const OverflowError&) {
          return std::pair<bool, double>{true, INFINITY};
        }
        for (std::size_t i = 0; i < n2; ++i) out[i] = p2[i] + (p2[i] - p1[i]) / 3.0;
        const double s = monitor(out);
        return std::pair<bool, double>{!(s <= c.blowup_threshold), s};
      };
      double lo = 0.0, hi = h, sup_hi = sup;
      std::vector<double> x_hi = trial, probe(n2);
      for (int it = 0; it < 400 && hi - lo > 1e-6 * (tv + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto [cr, s] = crossed(mid, probe);
        if (cr) {
          hi = mid;
          if (std::isfinite(s)) {
            x_hi = probe;
            sup_hi = s;
          }
        } else {
          lo = mid;
        }
      }
      ++rec.accepted_steps;
      rec.status = RunStatus::blew_up;
      rec.t_star_bracket = std::make_pair(tv + lo, tv + hi);
      record(tv + hi, x_hi, sup_hi);
      return rec;
    }

    ++rec.accepted_steps;
    u.swap(trial);
    t.add(h);
    if (clipped) {
      t = detail::DDTime{target, 0.0};
      if (c.record_every > 0.0 && target < t_max) ++next_record;
    }
    if (c.record_every <= 0.0 || clipped) record(t.value(), u, sup);

    const double fac = err > 0.0 ? std::clamp(0.9 * std::cbrt(tol / err), 0.2, 2.0) : 2.0;
    dt = clipped ? std::max(dt, h * fac) : h * fac;
  }
  return rec;
}

TrajectoryRecord integrate(const StateVec& t0, const Model& model, double t_max,
                           const StepControls& controls) {
  const auto violations = validate(model.params(), model.forcing());
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v;
    throw ConfigError("model", msg);
  }
  return integrate(t0, Dynamics::from_model(model), t_max, controls);
}

std::optional<std::pair<double, double>> detect_blowup(const TrajectoryRecord& record) {
  if (record.status != RunStatus::blew_up) return std::nullopt;
  return record.t_star_bracket;
}

}  // namespace ebm2
