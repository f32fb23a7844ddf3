#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ebm2/errors.hpp"
#include "ebm2/parallel.hpp"
#include "ebm2/qualitative.hpp"

namespace ebm2 {
namespace {

struct NodalState {
  std::vector<double> a, s, ga, gs, da, ds;  // values, G, dT/dt at the nodes
  std::vector<double> dcoef;                 // dT/dt coefficients (packed)
};

NodalState nodal_state(const StateVec& state, const Model& model, double t) {
  const SpectralGrid& g = *model.grid();
  const std::size_t n = g.n_modes(), q = g.n_quad();
  NodalState ns;
  ns.a = synthesize(state.t_a);
  ns.s = synthesize(state.t_s);
  ns.ga.resize(q);
  ns.gs.resize(q);
  model.nodal_G(t, ns.a, ns.s, ns.ga, ns.gs);
  ns.dcoef.resize(2 * n);
  analyze_into(ns.ga, g, std::span<double>(ns.dcoef).subspan(0, n));
  analyze_into(ns.gs, g, std::span<double>(ns.dcoef).subspan(n, n));
  for (std::size_t i = 0; i < n; ++i) {
    ns.dcoef[i] -= model.params().kappa_a * g.eig()[i] * state.t_a.coeffs[i];
    ns.dcoef[n + i] -= model.params().kappa_s * g.eig()[i] * state.t_s.coeffs[i];
  }
  const auto d = StateVec::from_packed(model.grid(), ns.dcoef);
  ns.da = synthesize(d.t_a);
  ns.ds = synthesize(d.t_s);
  return ns;
}

// Three-point derivative on a possibly non-uniform grid.
double centered(double tm, double t0, double tp, double fm, double f0, double fp) {
  const double hm = t0 - tm, hp = tp - t0;
  return (hm * hm * fp - hp * hp * fm - (hm * hm - hp * hp) * f0) / (hm * hp * (hm + hp));
}

}  // namespace

double de_v_dt_formula(const StateVec& state, const Model& model, double t) {
  const SpectralGrid& g = *model.grid();
  const std::size_t n = g.n_modes();
  const auto ns = nodal_state(state, model, t);
  const ModelParams& p = model.params();
  const auto w = g.weights();
  const std::span<const double> dc(ns.dcoef);
  const double na = h_norm(dc.subspan(0, n), g), nsn = h_norm(dc.subspan(n, n), g);
  double fa = 0.0, fs = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    fa += w[j] * p.gamma_a * ns.ga[j] * ns.da[j];
    fs += w[j] * p.gamma_s * ns.gs[j] * ns.ds[j];
  }
  return -2.0 * (p.gamma_a * na * na + p.gamma_s * nsn * nsn) + 2.0 * (fa + fs);
}

double energy_identity_rhs(const StateVec& state, const Model& model, double t) {
  const SpectralGrid& g = *model.grid();
  const ModelParams& p = model.params();
  const Forcing& f = model.forcing();
  const auto a = synthesize(state.t_a), s = synthesize(state.t_s);
  const auto w = g.weights();
  const double r = f.r(t);
  const bool full = model.terms() == ReactionTerms::full;
  const double lam = model.terms() == ReactionTerms::none ? 0.0 : p.lambda;
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double aa = std::abs(a[j]), as = std::abs(s[j]);
    double v = -lam * (a[j] - s[j]) * (a[j] - s[j]);
    if (full) {
      v += r * f.q_nodal[j] * (f.beta_a.value(a[j]) * a[j] + f.beta_s.value(s[j]) * s[j]);
      v += p.eps_a * p.sigma_b *
           (as * as * as * s[j] * a[j] + aa * aa * aa * a[j] * s[j] - 2.0 * std::pow(aa, 5));
      v -= p.sigma_b * std::pow(as, 5);
    }
    sum += w[j] * v;
  }
  return sum;
}

std::vector<EnergyRow> energy_series(const TrajectoryRecord& rec, const Model& model) {
  const std::size_t k = rec.times.size();
  if (k < 3) throw InputError("energy_series: needs at least three snapshots");
  for (std::size_t i = 1; i < k; ++i)
    if (rec.times[i] - rec.times[i - 1] > 0.01 + 1e-12)
      throw InputError("energy_series: snapshots too sparse (spacing must be <= 0.01)");
  std::vector<EnergyRow> rows;
  rows.reserve(k - 2);
  for (std::size_t i = 1; i + 1 < k; ++i) {
    const double tm = rec.times[i - 1], t0 = rec.times[i], tp = rec.times[i + 1];
    const auto& em = rec.energies[i - 1];
    const auto& e0 = rec.energies[i];
    const auto& ep = rec.energies[i + 1];
    EnergyRow r;
    r.t = t0;
    r.e_h = e0.e_h;
    r.e_v = e0.e_v;
    r.de_v_dt_numeric = centered(tm, t0, tp, em.e_v, e0.e_v, ep.e_v);
    r.de_v_dt_formula = de_v_dt_formula(rec.states[i], model, t0);
    r.identity_rhs = energy_identity_rhs(rec.states[i], model, t0);
    const double de_h = centered(tm, t0, tp, em.e_h, e0.e_h, ep.e_h);
    r.identity_residual = std::abs(0.5 * de_h + e0.e_v - r.identity_rhs);
    rows.push_back(r);
  }
  return rows;
}

namespace {

OdeState uniform_bound(const Model& model) {
  const Forcing& f = model.forcing();
  const OdeState w = warmest_equilibrium(ode_system(model, f.r_max() * f.q_max()));
  return {w.t_a + 1.0, w.t_s + 1.0};
}

}  // namespace

DissipationResult dissipation_check(const TrajectoryRecord& rec, const Model& model,
                                    double sigma) {
  if (!(sigma > 0.0)) throw DomainError("dissipation_check: sigma must be > 0");
  DissipationResult res;
  const OdeState m = uniform_bound(model);
  const std::size_t k = rec.times.size();
  std::size_t i0 = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (sup_norm(rec.states[i].t_a) <= m.t_a && sup_norm(rec.states[i].t_s) <= m.t_s) {
      i0 = i;
      break;
    }
  }
  if (i0 + 2 > k) return res;  // never (or too late) inside the bound regime
  res.applicable = true;
  res.tau0 = rec.times[i0];

  std::vector<double> dev(k, 0.0);
  for (std::size_t i = i0; i < k; ++i) {
    const auto& e = rec.energies;
    if (i == i0)
      dev[i] = (e[i + 1].e_v - e[i].e_v) / (rec.times[i + 1] - rec.times[i]);
    else if (i + 1 == k)
      dev[i] = (e[i].e_v - e[i - 1].e_v) / (rec.times[i] - rec.times[i - 1]);
    else
      dev[i] = centered(rec.times[i - 1], rec.times[i], rec.times[i + 1], e[i - 1].e_v, e[i].e_v,
                        e[i + 1].e_v);
  }
  res.n_bound = -std::numeric_limits<double>::infinity();
  for (std::size_t i = i0; i < k; ++i)
    res.n_bound = std::max(res.n_bound, dev[i] + sigma * rec.energies[i].e_v);

  const double ev0 = rec.energies[i0].e_v;
  res.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = i0; i < k; ++i) {
    const double bound = res.n_bound / sigma + std::exp(-sigma * (rec.times[i] - res.tau0)) * ev0;
    res.worst_margin = std::max(res.worst_margin, rec.energies[i].e_v - bound);
  }
  res.holds = res.worst_margin <= 1e-12 * (1.0 + ev0);
  return res;
}

AbsorbReport absorbing_probe(const std::vector<StateVec>& ensemble, const Model& model,
                             double t_max, double l1, const StepControls& controls,
                             double t_early, unsigned jobs) {
  const double e = model.params().eps_a;
  if (!(e > 0.0 && e < 2.0)) throw DomainError("absorbing_probe: eps_a must lie in (0, 2)");
  if (!model.forcing().autonomous()) throw UnsupportedError("absorbing_probe: needs constant r");
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto ra = dense_range(ensemble[i].t_a), rs = dense_range(ensemble[i].t_s);
    if (ra.min < 0.0 || rs.min < 0.0)
      throw InputError("absorbing_probe: initial state " + std::to_string(i) + " is negative");
  }

  AbsorbReport rep;
  const OdeState m = uniform_bound(model);
  const ModelParams& p = model.params();
  rep.c0 = 2.0 * p.gamma_a * m.t_a * m.t_a + 2.0 * p.gamma_s * m.t_s * m.t_s;
  rep.e_v_bound = l1;
  rep.t_early = t_early;

  std::vector<TrajectoryRecord> recs(ensemble.size());
  parallel_for(ensemble.size(), jobs, [&](std::size_t i) {
    recs[i] = integrate(ensemble[i], model, t_max, controls);
  });
  rep.stayed_in = true;
  rep.entry_times.assign(ensemble.size(), INFINITY);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].status != RunStatus::completed)
      throw InputError("absorbing_probe: trajectory " + std::to_string(i) + " ended as " +
                       to_string(recs[i].status));
    bool inside = false;
    for (std::size_t k = 0; k < recs[i].times.size(); ++k) {
      const bool in_u = recs[i].energies[k].e_h <= rep.c0 && recs[i].energies[k].e_v <= l1;
      if (!inside && in_u) {
        inside = true;
        rep.entry_times[i] = recs[i].times[k];
      } else if (inside && !in_u) {
        rep.stayed_in = false;
      }
    }
    if (!inside) rep.stayed_in = false;
  }

  auto diameter = [&](double t) {
    std::vector<std::vector<double>> at;
    for (const auto& r : recs) {
      const auto it = std::lower_bound(r.times.begin(), r.times.end(), t - 1e-12);
      const std::size_t k = std::min<std::size_t>(it - r.times.begin(), r.times.size() - 1);
      at.push_back(r.states[k].packed());
    }
    const SpectralGrid& g = *model.grid();
    const std::size_t n = g.n_modes();
    double d = 0.0;
    std::vector<double> diff(2 * n);
    for (std::size_t i = 0; i < at.size(); ++i)
      for (std::size_t j = i + 1; j < at.size(); ++j) {
        for (std::size_t c = 0; c < 2 * n; ++c) diff[c] = at[i][c] - at[j][c];
        const std::span<const double> dv(diff);
        const double ha = h_norm(dv.subspan(0, n), g), hs = h_norm(dv.subspan(n, n), g);
        d = std::max(d, std::sqrt(ha * ha + hs * hs));
      }
    return d;
  };
  rep.diameter_early = diameter(t_early);
  rep.diameter_final = diameter(t_max);
  return rep;
}

}  // namespace ebm2
