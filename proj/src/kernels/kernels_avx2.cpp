// Compiled with -mavx2 -mfma; only reached after the CPUID check in dispatch.cpp.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "ebm2/kernels.hpp"

namespace ebm2::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_avx2(const double* m, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

void combine_avx2(const double* a, const double* x, const double* b, const double* y,
                  double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bx = _mm256_mul_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(x + i), bx));
  }
  for (; i < n; ++i) out[i] = a[i] * x[i] + b[i] * y[i];
}

double weighted_sumsq_avx2(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), xv), xv, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

struct RampV {
  __m256d base, span, t_low, inv_width, slope_scale;
  explicit RampV(const RampCoeffs& r)
      : base(_mm256_set1_pd(r.base)),
        span(_mm256_set1_pd(r.span)),
        t_low(_mm256_set1_pd(r.t_low)),
        inv_width(_mm256_set1_pd(r.inv_width)),
        slope_scale(_mm256_set1_pd(6.0 * r.span * r.inv_width)) {}

  __m256d s(__m256d u) const {
    const __m256d v = _mm256_mul_pd(_mm256_sub_pd(u, t_low), inv_width);
    return _mm256_min_pd(_mm256_max_pd(v, _mm256_setzero_pd()), _mm256_set1_pd(1.0));
  }
  __m256d value(__m256d u) const {
    const __m256d sv = s(u);
    const __m256d poly =
        _mm256_mul_pd(_mm256_mul_pd(sv, sv), _mm256_fnmadd_pd(_mm256_set1_pd(2.0), sv, _mm256_set1_pd(3.0)));
    return _mm256_add_pd(base, _mm256_mul_pd(span, poly));
  }
  __m256d slope(__m256d u) const {
    const __m256d sv = s(u);
    return _mm256_mul_pd(slope_scale, _mm256_mul_pd(sv, _mm256_sub_pd(_mm256_set1_pd(1.0), sv)));
  }
};

void reaction_avx2(const ReactionCoeffs& c, const double* ua, const double* us,
                   const double* forcing, double* ga, double* gs, std::size_t n) {
  const __m256d lam = _mm256_set1_pd(c.lambda);
  const __m256d es = _mm256_set1_pd(c.eps_sigma);
  const __m256d es2 = _mm256_set1_pd(2.0 * c.eps_sigma);
  const __m256d sig = _mm256_set1_pd(c.sigma);
  const __m256d iga = _mm256_set1_pd(c.inv_gamma_a);
  const __m256d igs = _mm256_set1_pd(c.inv_gamma_s);
  const RampV ba(c.beta_a), bs(c.beta_s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(ua + i);
    const __m256d s = _mm256_loadu_pd(us + i);
    const __m256d f = _mm256_loadu_pd(forcing + i);
    const __m256d aa = vabs(a), as = vabs(s);
    const __m256d pa = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(aa, aa), aa), a);
    const __m256d ps = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(as, as), as), s);
    const __m256d exch = _mm256_mul_pd(lam, _mm256_sub_pd(a, s));
    __m256d fa = _mm256_sub_pd(_mm256_mul_pd(es, ps), exch);
    fa = _mm256_sub_pd(fa, _mm256_mul_pd(es2, pa));
    fa = _mm256_add_pd(fa, _mm256_mul_pd(f, ba.value(a)));
    __m256d fs = _mm256_sub_pd(exch, _mm256_mul_pd(sig, ps));
    fs = _mm256_add_pd(fs, _mm256_mul_pd(es, pa));
    fs = _mm256_add_pd(fs, _mm256_mul_pd(f, bs.value(s)));
    _mm256_storeu_pd(ga + i, _mm256_mul_pd(iga, fa));
    _mm256_storeu_pd(gs + i, _mm256_mul_pd(igs, fs));
  }
  if (i < n) scalar_table().reaction(c, ua + i, us + i, forcing + i, ga + i, gs + i, n - i);
}

void reaction_jacobian_avx2(const ReactionCoeffs& c, const double* ua, const double* us,
                            const double* forcing, double* daa, double* das, double* dsa,
                            double* dss, std::size_t n) {
  const __m256d lam = _mm256_set1_pd(c.lambda);
  const __m256d nlam = _mm256_set1_pd(-c.lambda);
  const __m256d es4 = _mm256_set1_pd(4.0 * c.eps_sigma);
  const __m256d es8 = _mm256_set1_pd(8.0 * c.eps_sigma);
  const __m256d sig4 = _mm256_set1_pd(4.0 * c.sigma);
  const __m256d iga = _mm256_set1_pd(c.inv_gamma_a);
  const __m256d igs = _mm256_set1_pd(c.inv_gamma_s);
  const RampV ba(c.beta_a), bs(c.beta_s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(ua + i);
    const __m256d s = _mm256_loadu_pd(us + i);
    const __m256d f = _mm256_loadu_pd(forcing + i);
    const __m256d aa = vabs(a), as = vabs(s);
    const __m256d ca = _mm256_mul_pd(_mm256_mul_pd(aa, aa), aa);
    const __m256d cs = _mm256_mul_pd(_mm256_mul_pd(as, as), as);
    __m256d v = _mm256_sub_pd(nlam, _mm256_mul_pd(es8, ca));
    v = _mm256_add_pd(v, _mm256_mul_pd(f, ba.slope(a)));
    _mm256_storeu_pd(daa + i, _mm256_mul_pd(iga, v));
    _mm256_storeu_pd(das + i, _mm256_mul_pd(iga, _mm256_add_pd(lam, _mm256_mul_pd(es4, cs))));
    _mm256_storeu_pd(dsa + i, _mm256_mul_pd(igs, _mm256_add_pd(lam, _mm256_mul_pd(es4, ca))));
    v = _mm256_sub_pd(nlam, _mm256_mul_pd(sig4, cs));
    v = _mm256_add_pd(v, _mm256_mul_pd(f, bs.slope(s)));
    _mm256_storeu_pd(dss + i, _mm256_mul_pd(igs, v));
  }
  if (i < n)
    scalar_table().reaction_jacobian(c, ua + i, us + i, forcing + i, daa + i, das + i, dsa + i,
                                     dss + i, n - i);
}

const KernelTable kAvx2{
    "avx2",          dot_avx2,      matvec_avx2,           combine_avx2,
    weighted_sumsq_avx2, reaction_avx2, reaction_jacobian_avx2,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace ebm2::kernels
