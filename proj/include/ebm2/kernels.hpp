#pragma once

// Data-parallel inner loops of the solver.
//
// Every kernel exists as a scalar reference implementation and, on x86-64
// builds, as an AVX2/FMA variant. The active table is chosen once at runtime
// from CPUID (override with EBM2_KERNELS=scalar|avx2 or set_backend()).
// Variants agree to rounding; tests/test_kernels.cpp checks this.

#include <cstddef>
#include <span>
#include <string_view>

namespace ebm2::kernels {

/// Cubic-smoothstep coalbedo in kernel form.
///   s = clamp((u - t_low) * inv_width, 0, 1)
///   beta(u)  = base + span * s^2 (3 - 2 s)
///   beta'(u) = 6 span inv_width s (1 - s)
/// A constant coalbedo is span = 0.
struct RampCoeffs {
  double base = 0.0;
  double span = 0.0;
  double t_low = 0.0;
  double inv_width = 1.0;
};

/// Pointwise reaction constants. The `forcing` array passed alongside carries
/// r(t) q(x_j); terms are switched off by zeroing their coefficient.
struct ReactionCoeffs {
  double inv_gamma_a = 1.0;
  double inv_gamma_s = 1.0;
  double lambda = 0.0;
  double eps_sigma = 0.0;  // eps_a * sigma_b
  double sigma = 0.0;      // sigma_b
  RampCoeffs beta_a;
  RampCoeffs beta_s;
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[r] = sum_c m[r * cols + c] * x[c]
  void (*matvec)(const double* m, const double* x, double* y, std::size_t rows,
                 std::size_t cols);
  // out = a * x + b * y (elementwise)
  void (*combine)(const double* a, const double* x, const double* b, const double* y,
                  double* out, std::size_t n);
  // sum_i w_i x_i^2
  double (*weighted_sumsq)(const double* w, const double* x, std::size_t n);
  // Nodal reaction G = (F_a / gamma_a, F_s / gamma_s).
  void (*reaction)(const ReactionCoeffs& c, const double* ua, const double* us,
                   const double* forcing, double* ga, double* gs, std::size_t n);
  // Pointwise Jacobian of G.
  void (*reaction_jacobian)(const ReactionCoeffs& c, const double* ua, const double* us,
                            const double* forcing, double* daa, double* das, double* dsa,
                            double* dss, std::size_t n);
};

enum class Backend { scalar, avx2 };

const KernelTable& scalar_table() noexcept;
/// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_table() noexcept;
/// True when the AVX2 table is compiled in and the CPU reports AVX2 and FMA.
bool avx2_available() noexcept;

/// Table used by the library. Thread-safe.
const KernelTable& active() noexcept;
/// Switch backends; throws UnsupportedError if the backend is unavailable.
void set_backend(Backend b);
Backend backend() noexcept;
std::string_view backend_name() noexcept;

// Span front-ends over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y);
void combine(std::span<const double> a, std::span<const double> x, std::span<const double> b,
             std::span<const double> y, std::span<double> out);
double weighted_sumsq(std::span<const double> w, std::span<const double> x);

}  // namespace ebm2::kernels
