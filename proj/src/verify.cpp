#include "ebm2/verify.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "ebm2/errors.hpp"
#include "ebm2/kernels.hpp"
#include "ebm2/parallel.hpp"
#include "ebm2/qualitative.hpp"

namespace ebm2 {

Suite parse_suite(const std::string& name) {
  if (name == "core") return Suite::core;
  if (name == "qualitative") return Suite::qualitative;
  if (name == "all") return Suite::all;
  throw ConfigError("suite", "expected core, qualitative or all");
}

namespace {

struct Check {
  const char* name;
  double tol;
  std::function<double()> worst;  // compared as worst <= tol * tol_scale
};

double spectral_exactness() {
  const auto g = SpectralGrid::make(32);
  double worst = 0.0;
  for (int n = 0; n < 32; ++n) {
    std::vector<double> c(32, 0.0);
    c[n] = 1.0;
    auto a = apply_A(SpectralField(g, c));
    a.coeffs[n] += n * (n + 1.0);
    worst = std::max(worst, h_norm(a.coeffs, *g) / (1.0 + n * (n + 1.0)));
  }
  return worst;
}

double semigroup_exactness() {
  const auto g = SpectralGrid::make(16);
  ModelParams p;
  p.kappa_a = p.kappa_s = 1.0;
  Model m(p, Forcing::make(g), ReactionTerms::none);
  StateVec s(g);
  s.t_a.coeffs[3] = 1.0;
  s.t_s.coeffs[5] = 1.0;
  StepControls ctl;
  ctl.record_every = 0.5;
  const auto rec = integrate(s, m, 0.5, ctl);
  const auto& f = rec.states.back();
  return std::max(std::abs(f.t_a.coeffs[3] - std::exp(-6.0)),
                  std::abs(f.t_s.coeffs[5] - std::exp(-15.0)));
}

double ode_reduction() {
  const auto g = SpectralGrid::make(8);
  ModelParams p;
  Model m(p, Forcing::make(g));
  StepControls ctl;
  ctl.rel_tol = 1e-10;
  ctl.record_every = 0.5;
  const auto rec = integrate(StateVec::constant(g, 0.5, 0.7), m, 5.0, ctl);
  OdeOptions oo;
  oo.record_every = 0.5;
  const auto ode = integrate_ode({0.5, 0.7}, ode_system(m, 1.0), 5.0, 1e-12, oo);
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const OdeState y = sample(ode, rec.times[i]);
    worst = std::max({worst, std::abs(sup_norm(rec.states[i].t_a) - std::abs(y.t_a)),
                      std::abs(sup_norm(rec.states[i].t_s) - std::abs(y.t_s))});
  }
  return worst;
}

double closed_form_equilibrium() {
  OdeSystem sys;
  sys.params.lambda = 0.0;
  const auto eq = find_equilibria(sys);
  double worst = INFINITY;
  for (const auto& e : eq)
    worst = std::min(worst, std::max(std::abs(e.t_a - 1.0), std::abs(e.t_s - std::pow(2.0, 0.25))));
  return worst;
}

double jacobian_order() {
  const auto g = SpectralGrid::make(12);
  Forcing f = Forcing::make(g);
  f.beta_s = Coalbedo::ramp(0.3, 1.0, 0.6, 1.4);
  Model m(ModelParams{}, f);
  std::mt19937_64 rng(7);
  const StateVec u = random_state(g, rng, {});
  StateVec v = random_state(g, rng, {});
  const auto jac = m.eval_G_jacobian(u, 0.0);
  const auto ua = synthesize(u.t_a), us = synthesize(u.t_s);
  const auto va = synthesize(v.t_a), vs = synthesize(v.t_s);
  const std::size_t q = ua.size();
  auto err = [&](double e) {
    std::vector<double> pa(q), ps(q), ma(q), ms(q), gpa(q), gps(q), gma(q), gms(q);
    for (std::size_t j = 0; j < q; ++j) {
      pa[j] = ua[j] + e * va[j];
      ps[j] = us[j] + e * vs[j];
      ma[j] = ua[j] - e * va[j];
      ms[j] = us[j] - e * vs[j];
    }
    m.nodal_G(0.0, pa, ps, gpa, gps);
    m.nodal_G(0.0, ma, ms, gma, gms);
    double w = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double la = jac.daa[j] * va[j] + jac.das[j] * vs[j];
      const double ls = jac.dsa[j] * va[j] + jac.dss[j] * vs[j];
      w = std::max({w, std::abs((gpa[j] - gma[j]) / (2 * e) - la),
                    std::abs((gps[j] - gms[j]) / (2 * e) - ls)});
    }
    return w;
  };
  // Central differences are second order; report the shortfall below 2.
  const double order = std::log10(err(1e-2) / err(1e-3));
  return std::abs(2.0 - order);
}

double hardy_ratio() {
  const auto g = SpectralGrid::make(10);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (double n : {0.5, 1.0, 4.0})
    for (double gamma : {0.25, 0.5, 0.9}) {
      std::vector<double> c(10);
      for (int k = 0; k < 10; ++k) c[k] = u(rng) / (1.0 + k);
      const auto r = hardy_check(SpectralField(g, c), n, gamma);
      worst = std::max(worst, r.lhs / r.rhs);
    }
  return worst;
}

double g_time_ratio() {
  const auto g = SpectralGrid::make(12);
  Forcing f = Forcing::make(g, QShape::make_p2(1.0, -0.5));
  f.r_kind = Forcing::RKind::sinusoidal;
  f.r_delta = 0.3;
  f.r_omega = 2.0 * M_PI;
  f.beta_s = Coalbedo::ramp(0.3, 1.0, 0.6, 1.4);
  Model m(ModelParams{}, f);
  const double c = m.g_time_lipschitz_bound();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const StateVec u = random_state(g, rng, {});
    const double t = ut(rng), s = ut(rng);
    const auto a = m.eval_G(t, u).packed(), b = m.eval_G(s, u).packed();
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    const std::span<const double> dv(d);
    const std::size_t n = g->n_modes();
    const double h = std::hypot(h_norm(dv.subspan(0, n), *g), h_norm(dv.subspan(n, n), *g));
    if (t != s) worst = std::max(worst, h / (c * std::abs(t - s)));
  }
  return worst;
}

double kernel_equivalence() {
  const auto* avx = kernels::avx2_table();
  if (!avx || !kernels::avx2_available()) return 0.0;
  const auto& sc = kernels::scalar_table();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(37), b(37);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  return std::abs(sc.dot(a.data(), b.data(), a.size()) - avx->dot(a.data(), b.data(), a.size()));
}

// Ordered pairs from random smooth data; returns the worst ordering violation.
double comparison_violation() {
  const auto g = SpectralGrid::make(12);
  Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, -0.5)));
  StepControls ctl;
  ctl.rel_tol = 1e-10;
  ctl.record_every = 0.25;
  std::mt19937_64 rng(19);
  double worst = -INFINITY;
  for (int k = 0; k < 3; ++k) {
    const StateVec lo = random_state(g, rng, {.floor = 0.0});
    // hi = lo + a nonnegative smooth perturbation
    const StateVec d = random_state(g, rng, {.mean_a = 0.2, .mean_s = 0.2, .floor = 0.0});
    StateVec hi = lo;
    for (std::size_t i = 0; i < lo.t_a.coeffs.size(); ++i) {
      hi.t_a.coeffs[i] += d.t_a.coeffs[i];
      hi.t_s.coeffs[i] += d.t_s.coeffs[i];
    }
    const auto rep = check_comparison(lo, hi, m, 5.0, ctl);
    worst = std::max(worst, -rep.max_violation / rep.scale);
  }
  return worst;
}

double positivity_violation() {
  const auto g = SpectralGrid::make(12);
  Model m(ModelParams{}, Forcing::make(g));
  StepControls ctl;
  ctl.rel_tol = 1e-10;
  ctl.record_every = 0.1;
  std::mt19937_64 rng(23);
  const auto rec = integrate(random_state(g, rng, {.floor = 0.0}), m, 3.0, ctl);
  const auto rep = check_positivity(rec, m.forcing());
  return rep.passed ? -rep.max_violation / rep.scale : INFINITY;
}

double sandwich_violation() {
  const auto g = SpectralGrid::make(12);
  Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  StepControls ctl;
  ctl.rel_tol = 1e-10;
  ctl.record_every = 0.25;
  std::mt19937_64 rng(29);
  const auto rep = check_sandwich(random_state(g, rng, {.floor = 0.0}), m, 5.0, ctl);
  return -rep.max_violation / rep.scale;
}

double warmest_dominance() {
  const auto g = SpectralGrid::make(8);
  Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  const auto warm = solve_equilibrium(m, EquilibriumSeed{EquilibriumSeed::Kind::warmest, {}});
  const auto cold = solve_equilibrium(m, EquilibriumSeed{EquilibriumSeed::Kind::coldest, {}});
  const auto wa = synthesize(warm.state.t_a), ws = synthesize(warm.state.t_s);
  const auto ca = synthesize(cold.state.t_a), cs = synthesize(cold.state.t_s);
  double worst = -INFINITY;
  for (std::size_t j = 0; j < wa.size(); ++j)
    worst = std::max({worst, ca[j] - wa[j], cs[j] - ws[j]});
  return worst;
}

// Residual over max(1e-4 |RHS|, 1e-6 scale), skipping the initial layer
// t < 0.5 where the third time derivative of E_H is large.
double energy_identity_residual() {
  const auto g = SpectralGrid::make(16);
  Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  StepControls ctl;
  ctl.rel_tol = 1e-12;
  ctl.record_every = 0.005;
  std::mt19937_64 rng(31);
  const auto rec = integrate(random_state(g, rng, {.floor = 0.0}), m, 1.5, ctl);
  double scale = 1.0;
  for (double v : rec.sup_norms) scale = std::max(scale, 1.0 + v);
  double worst = 0.0;
  for (const auto& r : energy_series(rec, m))
    if (r.t >= 0.5)
      worst = std::max(worst, r.identity_residual /
                                  std::max(1e-4 * std::abs(r.identity_rhs), 1e-6 * scale));
  return worst;
}

double rectangle_excursion_check() {
  OdeSystem sys;
  sys.params.eps_a = 1.0;
  const double mu = 0.5 * (1.0 + std::pow(2.0, 0.25));
  const auto rect = minimal_rectangle(sys, mu, false);
  return rectangle_excursion(sys, rect, 20.0, 8);
}

}  // namespace

std::vector<CheckRow> run_suite(Suite suite, double tol_scale, unsigned jobs) {
  std::vector<Check> checks;
  if (suite != Suite::qualitative) {
    checks.push_back({"spectral_exactness", 1e-12, spectral_exactness});
    checks.push_back({"semigroup_exactness", 1e-10, semigroup_exactness});
    checks.push_back({"ode_reduction", 1e-6, ode_reduction});
    checks.push_back({"closed_form_equilibrium", 1e-8, closed_form_equilibrium});
    checks.push_back({"jacobian_fd_order", 0.1, jacobian_order});
    checks.push_back({"hardy_ratio", 1.0, hardy_ratio});
    checks.push_back({"g_time_lipschitz_ratio", 1.0, g_time_ratio});
    checks.push_back({"kernel_equivalence", 1e-12, kernel_equivalence});
  }
  if (suite != Suite::core) {
    checks.push_back({"comparison", 1e-8, comparison_violation});
    checks.push_back({"positivity", 1e-8, positivity_violation});
    checks.push_back({"sandwich", 1e-8, sandwich_violation});
    checks.push_back({"warmest_dominance", 1e-7, warmest_dominance});
    checks.push_back({"energy_identity", 1.0, energy_identity_residual});
    checks.push_back({"rectangle_invariance", 1e-8, rectangle_excursion_check});
  }
  std::vector<CheckRow> rows(checks.size());
  parallel_for(checks.size(), jobs, [&](std::size_t i) {
    const Check& c = checks[i];
    CheckRow& r = rows[i];
    r.name = c.name;
    r.tolerance = c.tol * tol_scale;
    try {
      r.worst_value = c.worst();
      r.passed = std::isfinite(r.worst_value) && r.worst_value <= r.tolerance;
    } catch (const std::exception& e) {
      r.worst_value = INFINITY;
      r.passed = false;
      r.detail = e.what();
    }
  });
  return rows;
}

}  // namespace ebm2
