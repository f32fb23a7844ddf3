#include <algorithm>
#include <cmath>

#include "ebm2/kernels.hpp"

namespace ebm2::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_scalar(const double* m, const double* x, double* y, std::size_t rows,
                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

void combine_scalar(const double* a, const double* x, const double* b, const double* y,
                    double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * x[i] + b[i] * y[i];
}

double weighted_sumsq_scalar(const double* w, const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

inline double ramp_s(const RampCoeffs& r, double u) {
  return std::clamp((u - r.t_low) * r.inv_width, 0.0, 1.0);
}

inline double ramp_value(const RampCoeffs& r, double u) {
  const double s = ramp_s(r, u);
  return r.base + r.span * (s * s * (3.0 - 2.0 * s));
}

inline double ramp_slope(const RampCoeffs& r, double u) {
  const double s = ramp_s(r, u);
  return 6.0 * r.span * r.inv_width * (s * (1.0 - s));
}

void reaction_scalar(const ReactionCoeffs& c, const double* ua, const double* us,
                     const double* forcing, double* ga, double* gs, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = ua[i];
    const double s = us[i];
    const double abs_a = std::abs(a);
    const double abs_s = std::abs(s);
    const double pa = abs_a * abs_a * abs_a * a;  // |u|^3 u
    const double ps = abs_s * abs_s * abs_s * s;
    const double exch = c.lambda * (a - s);
    const double fa = -exch + c.eps_sigma * ps - 2.0 * c.eps_sigma * pa +
                      forcing[i] * ramp_value(c.beta_a, a);
    const double fs =
        exch - c.sigma * ps + c.eps_sigma * pa + forcing[i] * ramp_value(c.beta_s, s);
    ga[i] = c.inv_gamma_a * fa;
    gs[i] = c.inv_gamma_s * fs;
  }
}

void reaction_jacobian_scalar(const ReactionCoeffs& c, const double* ua, const double* us,
                              const double* forcing, double* daa, double* das, double* dsa,
                              double* dss, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double abs_a = std::abs(ua[i]);
    const double abs_s = std::abs(us[i]);
    const double ca = abs_a * abs_a * abs_a;
    const double cs = abs_s * abs_s * abs_s;
    daa[i] = c.inv_gamma_a *
             (-c.lambda - 8.0 * c.eps_sigma * ca + forcing[i] * ramp_slope(c.beta_a, ua[i]));
    das[i] = c.inv_gamma_a * (c.lambda + 4.0 * c.eps_sigma * cs);
    dsa[i] = c.inv_gamma_s * (c.lambda + 4.0 * c.eps_sigma * ca);
    dss[i] = c.inv_gamma_s *
             (-c.lambda - 4.0 * c.sigma * cs + forcing[i] * ramp_slope(c.beta_s, us[i]));
  }
}

const KernelTable kScalar{
    "scalar",     dot_scalar,      matvec_scalar,           combine_scalar,
    weighted_sumsq_scalar, reaction_scalar, reaction_jacobian_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace ebm2::kernels
