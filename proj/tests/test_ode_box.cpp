#include <gtest/gtest.h>

#include <cmath>

#include "ebm2/errors.hpp"
#include "ebm2/ode_box.hpp"
#include "oracles.hpp"

using namespace ebm2;

namespace {

OdeSystem system_with(double eps, double lambda, double q = 1.0) {
  OdeSystem s;
  s.params.eps_a = eps;
  s.params.lambda = lambda;
  s.q_bar = q;
  return s;
}

oracle::OdeParams oracle_params(const OdeSystem& s) {
  oracle::OdeParams p;
  p.gamma_a = s.params.gamma_a;
  p.gamma_s = s.params.gamma_s;
  p.sigma = s.params.sigma_b;
  p.eps = s.params.eps_a;
  p.lambda = s.params.lambda;
  p.q = s.q_bar;
  p.beta_a = s.beta_a.beta_min;
  p.beta_s = s.beta_s.beta_min;
  return p;
}

}  // namespace

TEST(OdeRhs, MatchesHandWrittenSystem) {
  const auto s = system_with(0.7, 0.4, 1.3);
  const auto r = ode_rhs(0.0, {0.9, -1.1}, s);
  const auto ref = oracle::ode_rhs(oracle_params(s), {0.9, -1.1});
  EXPECT_NEAR(r.t_a, ref[0], 1e-14);
  EXPECT_NEAR(r.t_s, ref[1], 1e-14);
}

TEST(IntegrateOde, MatchesRk4Oracle) {
  for (double eps : {0.5, 1.0, 1.9}) {
    const auto s = system_with(eps, 0.5);
    OdeOptions o;
    o.record_every = 1.0;
    const auto tr = integrate_ode({0.2, 1.7}, s, 10.0, 1e-12, o);
    ASSERT_FALSE(tr.blew_up);
    ASSERT_EQ(tr.times.size(), 11u);
    const auto p = oracle_params(s);
    oracle::Vec y{0.2, 1.7};
    for (int k = 1; k <= 10; ++k) {
      y = oracle::rk4([&](double, const oracle::Vec& v) { return oracle::ode_rhs(p, v); }, y,
                      k - 1.0, double(k), 4000);
      EXPECT_DOUBLE_EQ(tr.times[k], double(k));
      EXPECT_NEAR(tr.states[k].t_a, y[0], 1e-9) << eps;
      EXPECT_NEAR(tr.states[k].t_s, y[1], 1e-9) << eps;
    }
  }
}

TEST(IntegrateOde, SampleInterpolatesLinearly) {
  const auto s = system_with(1.0, 0.5);
  OdeOptions o;
  o.record_every = 0.5;
  const auto tr = integrate_ode({1.0, 1.0}, s, 2.0, 1e-10, o);
  const auto mid = sample(tr, 0.75);
  EXPECT_NEAR(mid.t_a, 0.5 * (tr.states[1].t_a + tr.states[2].t_a), 1e-15);
  EXPECT_THROW(integrate_ode({1.0, 1.0}, s, 1.0, 0.0), DomainError);
  EXPECT_THROW(integrate_ode({NAN, 1.0}, s, 1.0, 1e-8), InputError);
}

TEST(IntegrateOde, BlowUpBracketIsNarrowAndStable) {
  const auto s = system_with(3.0, 0.0);
  const auto a = integrate_ode({1.0, 1.0}, s, 100.0, 1e-12);
  ASSERT_TRUE(a.blew_up);
  const auto [lo, hi] = *a.t_star_bracket;
  EXPECT_LE(hi - lo, 1e-6 * hi);
  OdeOptions o7;
  o7.blowup_threshold = 1e7;
  const auto b = integrate_ode({1.0, 1.0}, s, 100.0, 1e-12, o7);
  ASSERT_TRUE(b.blew_up);
  // Past 1e7 the remaining escape time is ~1e-21, far below the bracket width.
  EXPECT_NEAR(b.t_star_bracket->second, hi, 2 * (hi - lo) + 1e-6 * hi);
  const auto c = integrate_ode({1.0, 1.0}, s, 100.0, 1e-13);
  EXPECT_NEAR(c.t_star_bracket->second, hi, 1e-6 * hi);
  // The oracle agrees well before the escape.
  const auto p = oracle_params(s);
  const auto y = oracle::rk4([&](double, const oracle::Vec& v) { return oracle::ode_rhs(p, v); },
                             {1.0, 1.0}, 0.0, 0.5 * lo, 20000);
  const auto mid = integrate_ode({1.0, 1.0}, s, 0.5 * lo, 1e-12);
  EXPECT_NEAR(mid.states.back().t_a, y[0], 1e-8 * (1 + std::abs(y[0])));
}

TEST(Equilibria, ClosedFormCase) {
  // lambda = 0, beta_a = 0, beta_s = 1, q = 1, eps = 1: (1, 2^(1/4)).
  const auto s = system_with(1.0, 0.0);
  const auto eq = find_equilibria(s);
  ASSERT_EQ(eq.size(), 1u);
  EXPECT_NEAR(eq[0].t_a, 1.0, 1e-12);
  EXPECT_NEAR(eq[0].t_s, std::pow(2.0, 0.25), 1e-12);
  EXPECT_NEAR(equilibrium_residual(s, eq[0].t_s), 0.0, 1e-12);
  EXPECT_NEAR(nullcline_phi(s, eq[0].t_s), eq[0].t_a, 1e-12);
}

TEST(Equilibria, GeneralEpsMatchesClosedForm) {
  // lambda = 0: T_a^4 = T_s^4 / 2 and T_s^4 (1 - eps/2) = q.
  for (double eps : {0.3, 1.0, 1.7}) {
    const auto s = system_with(eps, 0.0, 2.0);
    const auto w = warmest_equilibrium(s);
    const double ts = std::pow(2.0 / (1 - eps / 2), 0.25);
    EXPECT_NEAR(w.t_s, ts, 1e-11);
    EXPECT_NEAR(w.t_a, ts / std::pow(2.0, 0.25), 1e-11);
    const auto r = ode_rhs(0.0, w, s);
    EXPECT_NEAR(r.t_a, 0.0, 1e-10);
    EXPECT_NEAR(r.t_s, 0.0, 1e-10);
  }
}

TEST(Equilibria, RampCoalbedoGivesMultipleStates) {
  auto s = system_with(1.0, 0.5);
  s.beta_s = Coalbedo::ramp(0.3, 1.0, 0.9, 1.1);
  const auto eq = find_equilibria(s);
  ASSERT_GE(eq.size(), 2u);
  for (std::size_t i = 1; i < eq.size(); ++i) EXPECT_LT(eq[i - 1].t_s, eq[i].t_s);
  const auto w = warmest_equilibrium(s), c = coldest_equilibrium(s);
  EXPECT_DOUBLE_EQ(w.t_s, eq.back().t_s);
  EXPECT_DOUBLE_EQ(c.t_s, eq.front().t_s);
  for (const auto& e : eq) {
    const auto r = ode_rhs(0.0, e, s);
    EXPECT_NEAR(r.t_a, 0.0, 1e-9);
    EXPECT_NEAR(r.t_s, 0.0, 1e-9);
  }
}

TEST(Equilibria, Preconditions) {
  EXPECT_THROW(find_equilibria(system_with(2.5, 0.0)), DomainError);
  auto s = system_with(1.0, 0.0);
  s.beta_a = Coalbedo::constant(0.1);
  EXPECT_THROW(find_equilibria(s), UnsupportedError);
  s.experimental = true;
  const auto eq = find_equilibria(s);
  ASSERT_FALSE(eq.empty());
  const auto r = ode_rhs(0.0, eq.back(), s);
  EXPECT_NEAR(r.t_a, 0.0, 1e-9);
  EXPECT_NEAR(r.t_s, 0.0, 1e-9);
}

TEST(Rectangle, MinimalAndInward) {
  for (double eps : {0.5, 1.0, 1.9}) {
    const auto s = system_with(eps, 0.5);
    const double mu = 0.5 * (std::pow(eps, 0.25) + std::pow(2.0, 0.25));
    const auto rect = minimal_rectangle(s, mu);
    EXPECT_TRUE(rectangle_inward(s, rect.m, mu));
    EXPECT_FALSE(rectangle_inward(s, rect.m * (1 - 1e-3), mu));
    EXPECT_TRUE(rect.verified) << rect.worst_excursion;
    EXPECT_LE(rect.worst_excursion, 1e-8);
    EXPECT_FALSE(rect.range_warning);
  }
  EXPECT_THROW(minimal_rectangle(system_with(1.0, 0.5), 1.5), DomainError);
}

TEST(Extremal, UsesDenseRangeAndForcingBounds) {
  const auto g = SpectralGrid::make(6);
  StateVec s(g);
  s.t_a.coeffs = {1.0, 0.5, 0, 0, 0, 0};  // 1 + x/2 on [-1, 1]
  s.t_s.coeffs = {2.0, 0, 0.3, 0, 0, 0};  // 2 + 0.3 P_2
  Forcing f = Forcing::make(g, QShape::make_p2(1.0, 0.5));
  const auto ex = extremal_data(s, f);
  EXPECT_NEAR(ex.t_min0.t_a, 0.5, 1e-14);
  EXPECT_NEAR(ex.t_max0.t_a, 1.5, 1e-14);
  EXPECT_NEAR(ex.t_min0.t_s, 2.0 - 0.15, 1e-12);
  EXPECT_NEAR(ex.t_max0.t_s, 2.3, 1e-14);
  EXPECT_DOUBLE_EQ(ex.q_bar_min, 0.75);
  EXPECT_DOUBLE_EQ(ex.q_bar_max, 1.5);
}
