#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ebm2/errors.hpp"
#include "ebm2/integrator.hpp"
#include "ebm2/qualitative.hpp"
#include "oracles.hpp"

using namespace ebm2;

namespace {

double packed_v(const std::vector<double>& u, const SpectralGrid& g) {
  const std::size_t n = g.n_modes();
  const std::span<const double> s(u);
  return std::hypot(v_norm(s.subspan(0, n), g), v_norm(s.subspan(n, n), g));
}

std::vector<double> diff(const StateVec& a, const StateVec& b) {
  auto x = a.packed();
  const auto y = b.packed();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= y[i];
  return x;
}

}  // namespace

TEST(Phi, MatchLongDoubleReference) {
  for (double z : {-50.0, -3.0, -0.7, -0.5, -0.3, -1e-3, -1e-5, -1e-9, 0.0, 1e-6, 0.2, 2.0}) {
    const long double zl = z;
    const long double p1 = z == 0 ? 1.0L : std::expm1(zl) / zl;
    const long double p2 = z == 0 ? 0.5L : (std::expm1(zl) - zl) / (zl * zl);
    EXPECT_NEAR(phi1(z), double(p1), 1e-15 * std::abs(double(p1))) << z;
    // long double loses accuracy in (expm1 - z)/z^2 at tiny z; Taylor there.
    const double ref2 = std::abs(z) < 1e-3 ? 0.5 + z / 6 + z * z / 24 : double(p2);
    EXPECT_NEAR(phi2(z), ref2, 1e-14 * std::abs(ref2)) << z;
  }
}

TEST(Etd, ZeroReactionIsExactSemigroup) {
  const auto g = SpectralGrid::make(12);
  const Model m(ModelParams{}, Forcing::make(g), ReactionTerms::none);
  std::mt19937_64 rng(1);
  const StateVec s = random_state(g, rng, {});
  const auto a = step_etd1(s, 0.0, 0.37, m), b = step_etdrk2(s, 0.0, 0.37, m);
  for (int n = 0; n < 12; ++n) {
    const double ea = std::exp(-0.2 * n * (n + 1) * 0.37), es = std::exp(-0.1 * n * (n + 1) * 0.37);
    EXPECT_NEAR(a.t_a.coeffs[n], ea * s.t_a.coeffs[n], 1e-16);
    EXPECT_NEAR(a.t_s.coeffs[n], es * s.t_s.coeffs[n], 1e-16);
    EXPECT_EQ(a.t_a.coeffs[n], b.t_a.coeffs[n]);
    EXPECT_EQ(a.t_s.coeffs[n], b.t_s.coeffs[n]);
  }
  EXPECT_THROW(step_etd1(s, 0.0, 0.0, m), DomainError);
}

TEST(Etd, ConstantSourceIsExactVariationOfConstants) {
  // G = const c_n: u_n(dt) = e^{-k dt} u_n + (1 - e^{-k dt})/k c_n, and
  // u_0(dt) = u_0 + dt c_0 in the mass mode.
  const auto g = SpectralGrid::make(6);
  Dynamics d;
  d.grid = g;
  d.kappa_a = 0.3;
  d.kappa_s = 0.7;
  const std::vector<double> src{0.5, -1.0, 0.25, 0.0, 2.0, 0.1, 1.0, 0.0, -0.5, 0.3, 0.0, 0.2};
  d.reaction = [&](double, std::span<const double>, std::span<double> out) {
    std::copy(src.begin(), src.end(), out.begin());
  };
  std::vector<double> u(12, 1.0), out(12);
  const double dt = 0.8;
  etd1_step(d, 0.0, dt, u, out);
  for (int n = 0; n < 6; ++n)
    for (int c = 0; c < 2; ++c) {
      const double k = (c ? 0.7 : 0.3) * n * (n + 1);
      const double ref = n == 0 ? 1.0 + dt * src[c * 6]
                                : std::exp(-k * dt) + (-std::expm1(-k * dt)) / k * src[c * 6 + n];
      EXPECT_NEAR(out[c * 6 + n], ref, 2e-16 * (1 + std::abs(ref)));
    }
}

TEST(Etd, MatchesOdeStepToSecondOrder) {
  const auto g = SpectralGrid::make(4);
  const Model m(ModelParams{}, Forcing::make(g));
  const StateVec s = StateVec::constant(g, 0.8, 1.2);
  oracle::OdeParams p;
  auto exact = [&](double dt) {
    return oracle::rk4([&](double, const oracle::Vec& v) { return oracle::ode_rhs(p, v); },
                       {0.8, 1.2}, 0.0, dt, 200);
  };
  double prev = 0;
  for (double dt : {0.04, 0.02, 0.01}) {
    const auto a = step_etd1(s, 0.0, dt, m);
    const auto y = exact(dt);
    const double e = std::hypot(a.t_a.coeffs[0] - y[0], a.t_s.coeffs[0] - y[1]);
    EXPECT_LT(e, 6.0 * dt * dt);
    if (prev > 0) {
      EXPECT_NEAR(prev / e, 4.0, 0.4);
    }
    prev = e;
  }
}

TEST(Etd, Etdrk2ObservedOrderOnLinearCoupling) {
  // Coupling-only G is linear and non-diagonal in the mode basis' components,
  // so the exponential scheme is not exact and its order is visible.
  const auto g = SpectralGrid::make(8);
  const Model m(ModelParams{}, Forcing::make(g), ReactionTerms::coupling_only);
  std::mt19937_64 rng(3);
  const StateVec s0 = random_state(g, rng, {});
  auto run = [&](int steps) {
    StateVec s = s0;
    const double h = 1.0 / steps;
    for (int k = 0; k < steps; ++k) s = step_etdrk2(s, k * h, h, m);
    return s;
  };
  const auto ref = run(4096);
  const double e1 = packed_v(diff(run(32), ref), *g);
  const double e2 = packed_v(diff(run(64), ref), *g);
  EXPECT_GE(std::log2(e1 / e2), 1.9);
}

TEST(Integrate, PureDiffusionExactDecay) {
  const auto g = SpectralGrid::make(8);
  ModelParams p;
  p.kappa_a = p.kappa_s = 1.0;
  const Model m(p, Forcing::make(g), ReactionTerms::none);
  StateVec s(g);
  s.t_a.coeffs[3] = 1.0;
  s.t_s.coeffs[5] = 1.0;
  StepControls c;
  c.record_every = 0.05;
  const auto rec = integrate(s, m, 0.5, c);
  ASSERT_EQ(rec.status, RunStatus::completed);
  EXPECT_NEAR(rec.states.back().t_a.coeffs[3], std::exp(-12 * 0.5), 1e-10);
  EXPECT_NEAR(rec.states.back().t_s.coeffs[5], std::exp(-30 * 0.5), 1e-10);
  // contraction: every norm is non-increasing between records
  for (std::size_t i = 1; i < rec.times.size(); ++i) {
    EXPECT_LE(rec.v_norms[i], rec.v_norms[i - 1] * (1 + 1e-14));
    EXPECT_LE(rec.energies[i].e_h, rec.energies[i - 1].e_h * (1 + 1e-14));
    EXPECT_LE(rec.energies[i].e_v, rec.energies[i - 1].e_v * (1 + 1e-14));
  }
}

TEST(Integrate, RecordTimesAreExactMultiples) {
  const auto g = SpectralGrid::make(6);
  const Model m(ModelParams{}, Forcing::make(g));
  StepControls c;
  c.record_every = 0.1;
  const auto rec = integrate(StateVec::constant(g, 1, 1), m, 1.0, c);
  ASSERT_EQ(rec.times.size(), 11u);
  for (int k = 1; k < 10; ++k) EXPECT_DOUBLE_EQ(rec.times[k], k * 0.1);
  EXPECT_EQ(rec.times.back(), 1.0);
  EXPECT_EQ(rec.states.size(), rec.times.size());
  EXPECT_EQ(rec.energies.size(), rec.times.size());
  EXPECT_FALSE(detect_blowup(rec));
}

TEST(Integrate, SpatiallyConstantReducesToOde) {
  for (double eps : {0.5, 1.0, 1.9}) {
    const auto g = SpectralGrid::make(6);
    ModelParams p;
    p.eps_a = eps;
    const Model m(p, Forcing::make(g));
    StepControls c;
    c.rel_tol = 1e-10;
    c.record_every = 0.5;
    const auto rec = integrate(StateVec::constant(g, 0.3, 1.6), m, 10.0, c);
    oracle::OdeParams op;
    op.eps = eps;
    oracle::Vec y{0.3, 1.6};
    for (std::size_t i = 1; i < rec.times.size(); ++i) {
      y = oracle::rk4([&](double, const oracle::Vec& v) { return oracle::ode_rhs(op, v); }, y,
                      rec.times[i - 1], rec.times[i], 400);
      EXPECT_NEAR(rec.states[i].t_a.coeffs[0], y[0], 1e-6);
      EXPECT_NEAR(rec.states[i].t_s.coeffs[0], y[1], 1e-6);
      EXPECT_NEAR(rec.states[i].t_a.coeffs[3], 0.0, 1e-12);
    }
  }
}

TEST(Integrate, SelfConvergenceUnderTolerance) {
  const auto g = SpectralGrid::make(12);
  const Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  std::mt19937_64 rng(8);
  const StateVec s = random_state(g, rng, {.floor = 0.0});
  for (double tol : {1e-6, 1e-8}) {
    StepControls a, b;
    a.rel_tol = tol;
    b.rel_tol = tol / 2;
    const auto ra = integrate(s, m, 2.0, a), rb = integrate(s, m, 2.0, b);
    EXPECT_LT(packed_v(diff(ra.states.back(), rb.states.back()), *g), 10 * tol);
  }
}

TEST(Integrate, ContinuousDependenceOnInitialData) {
  // Frozen regression constant K for ||dT(t)||_V <= K delta on [0, 1].
  constexpr double kFrozenK = 1.5;
  const auto g = SpectralGrid::make(12);
  const Model m(ModelParams{}, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  std::mt19937_64 rng(12);
  StepControls c;
  c.rel_tol = 1e-11;
  c.record_every = 0.05;
  for (int trial = 0; trial < 4; ++trial) {
    const StateVec s = random_state(g, rng, {.floor = 0.0});
    StateVec p = random_state(g, rng, {.mean_a = 0, .mean_s = 0, .mean_jitter = 1.0, .floor = std::nullopt});
    const double nv = packed_v(p.packed(), *g);
    const double delta = 1e-4;
    for (auto* f : {&p.t_a, &p.t_s})
      for (auto& x : f->coeffs) x *= delta / nv;
    StateVec q = s;
    for (int i = 0; i < 12; ++i) {
      q.t_a.coeffs[i] += p.t_a.coeffs[i];
      q.t_s.coeffs[i] += p.t_s.coeffs[i];
    }
    const auto ra = integrate(s, m, 1.0, c), rb = integrate(q, m, 1.0, c);
    double worst = 0;
    for (std::size_t i = 0; i < ra.times.size(); ++i)
      worst = std::max(worst, packed_v(diff(ra.states[i], rb.states[i]), *g));
    EXPECT_LE(worst, kFrozenK * delta);
  }
}

TEST(Integrate, QuarticEscapeMatchesClosedForm) {
  // Mass-mode reaction G_0 = c u_0^4 (both components) escapes at 1/(3 c u0^3).
  const auto g = SpectralGrid::make(4);
  Dynamics d;
  d.grid = g;
  const double c = 2.0, u0 = 1.5;
  d.reaction = [&](double, std::span<const double> u, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = c * std::pow(u[0], 4);
    out[4] = c * std::pow(u[4], 4);
  };
  StepControls sc;
  sc.rel_tol = 1e-10;
  const auto rec = integrate(StateVec::constant(g, u0, u0), d, 10.0, sc);
  ASSERT_EQ(rec.status, RunStatus::blew_up);
  const auto br = *detect_blowup(rec);
  const double t_esc = oracle::quartic_escape_time(c, u0);
  // threshold 1e8 is reached 1/(3 c 1e24) before the escape: negligible
  EXPECT_LE(br.second - br.first, 1e-4 * br.second);
  EXPECT_NEAR(br.second, t_esc, 1e-5 * t_esc);
  EXPECT_GT(rec.sup_norms.back(), sc.blowup_threshold);
}

TEST(Integrate, BlowUpBracketStableUnderThreshold) {
  const auto g = SpectralGrid::make(8);
  ModelParams p;
  p.eps_a = 3.0;
  p.lambda = 0.0;
  const Model m(p, Forcing::make(g, QShape::make_p2(1.0, 0.5)));
  StepControls a;
  a.rel_tol = 1e-9;
  StepControls b = a;
  b.blowup_threshold = 1e7;
  const auto ra = integrate(StateVec::constant(g, 1.0, 1.0), m, 50.0, a);
  const auto rb = integrate(StateVec::constant(g, 1.0, 1.0), m, 50.0, b);
  ASSERT_EQ(ra.status, RunStatus::blew_up);
  ASSERT_EQ(rb.status, RunStatus::blew_up);
  const auto [lo, hi] = *ra.t_star_bracket;
  EXPECT_LE(lo, hi);  // near the threshold steps fall below one ulp of t
  EXPECT_LE(hi - lo, 1e-4 * hi);
  EXPECT_NEAR(rb.t_star_bracket->second, hi, 2 * (hi - lo) + 1e-6 * hi);
}

TEST(Integrate, InvalidControlsAndModel) {
  const auto g = SpectralGrid::make(4);
  const Model m(ModelParams{}, Forcing::make(g));
  const StateVec s = StateVec::constant(g, 1, 1);
  StepControls c;
  c.rel_tol = 0;
  try {
    integrate(s, m, 1.0, c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "run.rel_tol");
  }
  c = StepControls{};
  c.dt_min = 1.0;
  EXPECT_THROW(integrate(s, m, 1.0, c), ConfigError);
  ModelParams bad;
  bad.kappa_a = -1;
  EXPECT_THROW(integrate(s, Model(bad, Forcing::make(g)), 1.0), ConfigError);
  EXPECT_THROW(integrate(StateVec::constant(SpectralGrid::make(4), 1, 1), m, 1.0), ConfigError);
}

TEST(Integrate, StiffnessFailureOnStepBudget) {
  const auto g = SpectralGrid::make(4);
  const Model m(ModelParams{}, Forcing::make(g));
  StepControls c;
  c.max_steps = 3;
  c.record_every = 0.0;
  const auto rec = integrate(StateVec::constant(g, 1, 1), m, 100.0, c);
  EXPECT_EQ(rec.status, RunStatus::stiffness_failure);
  EXPECT_STREQ(to_string(rec.status), "stiffness_failure");
}

TEST(Energies, MatchDefinitions) {
  const auto g = SpectralGrid::make(6);
  ModelParams p;
  StateVec s(g);
  s.t_a.coeffs = {1, 0.5, 0, 0, 0, 0};
  s.t_s.coeffs = {2, 0, 0.1, 0, 0, 0};
  const auto e = energies(s, p);
  const double ha = 2 + 0.25 * 2.0 / 3, hs = 8 + 0.01 * 2.0 / 5;
  EXPECT_NEAR(e.e_h, p.gamma_a * ha + p.gamma_s * hs, 1e-14);
  const double da = 2 * 0.25 * 2.0 / 3, ds = 6 * 0.01 * 2.0 / 5;
  EXPECT_NEAR(e.e_v, p.gamma_a * p.kappa_a * da + p.gamma_s * p.kappa_s * ds, 1e-14);
}
