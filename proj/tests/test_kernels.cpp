#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ebm2/errors.hpp"
#include "ebm2/kernels.hpp"

using namespace ebm2;
using namespace ebm2::kernels;

namespace {

std::vector<double> rand_vec(std::mt19937_64& rng, std::size_t n, double lo = -2, double hi = 2) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

ReactionCoeffs sample_coeffs() {
  ReactionCoeffs c;
  c.inv_gamma_a = 1.0;
  c.inv_gamma_s = 0.5;
  c.lambda = 0.5;
  c.eps_sigma = 0.9;
  c.sigma = 1.0;
  c.beta_a = {0.1, 0.0, 0.0, 1.0};
  c.beta_s = {0.3, 0.7, 0.6, 1.0 / 0.8};
  return c;
}

// Relative agreement, allowing for FMA contraction and reassociation.
void expect_close(const std::vector<double>& a, const std::vector<double>& b, double rel = 1e-13) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_NEAR(a[i], b[i], rel * (1.0 + std::abs(a[i]))) << "index " << i;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!avx2_table() || !avx2_available()) GTEST_SKIP() << "no AVX2 variant on this machine";
  }
};

}  // namespace

TEST_P(KernelEquivalence, DotMatvecCombineSumsq) {
  const std::size_t n = GetParam();
  std::mt19937_64 rng(100 + n);
  const auto& s = scalar_table();
  const auto& v = *avx2_table();
  const auto a = rand_vec(rng, n), b = rand_vec(rng, n), w = rand_vec(rng, n, 0, 1);
  EXPECT_NEAR(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n), 1e-13 * (1 + n));
  EXPECT_NEAR(s.weighted_sumsq(w.data(), a.data(), n), v.weighted_sumsq(w.data(), a.data(), n),
              1e-13 * (1 + n));

  std::vector<double> out_s(n), out_v(n);
  s.combine(w.data(), a.data(), b.data(), a.data(), out_s.data(), n);
  v.combine(w.data(), a.data(), b.data(), a.data(), out_v.data(), n);
  expect_close(out_s, out_v);

  const std::size_t rows = 7;
  const auto m = rand_vec(rng, rows * n);
  std::vector<double> ys(rows), yv(rows);
  s.matvec(m.data(), a.data(), ys.data(), rows, n);
  v.matvec(m.data(), a.data(), yv.data(), rows, n);
  expect_close(ys, yv, 1e-13 * (1 + n));
}

TEST_P(KernelEquivalence, ReactionAndJacobian) {
  const std::size_t n = GetParam();
  std::mt19937_64 rng(200 + n);
  const auto c = sample_coeffs();
  const auto& s = scalar_table();
  const auto& v = *avx2_table();
  // Values straddle both ramp kinks (0.6 and 1.4) and zero.
  const auto ua = rand_vec(rng, n, -0.5, 2.0), us = rand_vec(rng, n, -0.5, 2.0);
  const auto f = rand_vec(rng, n, 0.0, 1.5);
  std::vector<double> ga(n), gs(n), ha(n), hs(n);
  s.reaction(c, ua.data(), us.data(), f.data(), ga.data(), gs.data(), n);
  v.reaction(c, ua.data(), us.data(), f.data(), ha.data(), hs.data(), n);
  expect_close(ga, ha);
  expect_close(gs, hs);

  std::vector<double> j[8];
  for (auto& x : j) x.assign(n, 0.0);
  s.reaction_jacobian(c, ua.data(), us.data(), f.data(), j[0].data(), j[1].data(), j[2].data(),
                      j[3].data(), n);
  v.reaction_jacobian(c, ua.data(), us.data(), f.data(), j[4].data(), j[5].data(), j[6].data(),
                      j[7].data(), n);
  for (int k = 0; k < 4; ++k) expect_close(j[k], j[k + 4]);
}

// Sizes cover empty input, pure scalar tails and several full vectors.
INSTANTIATE_TEST_SUITE_P(Sizes, KernelEquivalence,
                         ::testing::Values(0, 1, 3, 4, 5, 8, 13, 64, 101));

TEST(Kernels, ScalarReactionMatchesHandFormula) {
  const auto c = sample_coeffs();
  const double ua = 1.1, us = -0.3, f = 0.8;
  double ga, gs;
  scalar_table().reaction(c, &ua, &us, &f, &ga, &gs, 1);
  auto ramp = [](const RampCoeffs& r, double u) {
    const double s = std::clamp((u - r.t_low) * r.inv_width, 0.0, 1.0);
    return r.base + r.span * s * s * (3 - 2 * s);
  };
  const double a4 = std::pow(ua, 4), s4 = -std::pow(us, 4);
  EXPECT_NEAR(ga, -0.5 * (ua - us) + 0.9 * s4 - 2 * 0.9 * a4 + f * ramp(c.beta_a, ua), 1e-14);
  EXPECT_NEAR(gs, 0.5 * (-0.5 * (us - ua) - s4 + 0.9 * a4 + f * ramp(c.beta_s, us)), 1e-14);
}

TEST(Kernels, BackendSwitching) {
  const Backend before = backend();
  set_backend(Backend::scalar);
  EXPECT_EQ(backend_name(), "scalar");
  EXPECT_STREQ(active().name, "scalar");
  if (avx2_available()) {
    set_backend(Backend::avx2);
    EXPECT_EQ(backend_name(), "avx2");
  } else {
    EXPECT_THROW(set_backend(Backend::avx2), UnsupportedError);
  }
  set_backend(before);
}

TEST(Kernels, SpanWrappersCheckLengths) {
  std::vector<double> a(3), b(4), y(2);
  EXPECT_THROW(dot(a, b), DimensionError);
  EXPECT_THROW(matvec(std::vector<double>(5), a, y), DimensionError);
  EXPECT_THROW(weighted_sumsq(a, b), DimensionError);
  EXPECT_DOUBLE_EQ(dot(a, a), 0.0);
}
