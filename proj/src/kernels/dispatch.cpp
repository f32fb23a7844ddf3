#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ebm2/errors.hpp"
#include "ebm2/kernels.hpp"

namespace ebm2::kernels {

#ifndef EBM2_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool avx2_available() noexcept {
#if defined(EBM2_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("EBM2_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return &scalar_table();
    // An unavailable request falls through to autodetection.
    if (v == "avx2" && avx2_available()) return avx2_table();
  }
  return avx2_available() ? avx2_table() : &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) {
  if (b == Backend::scalar) {
    current().store(&scalar_table(), std::memory_order_release);
    return;
  }
  if (!avx2_available()) throw UnsupportedError("AVX2 kernels are not available on this build/CPU");
  current().store(avx2_table(), std::memory_order_release);
}

Backend backend() noexcept {
  return &active() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

std::string_view backend_name() noexcept { return active().name; }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y) {
  if (m.size() != x.size() * y.size()) throw DimensionError("matvec: shape mismatch");
  active().matvec(m.data(), x.data(), y.data(), y.size(), x.size());
}

void combine(std::span<const double> a, std::span<const double> x, std::span<const double> b,
             std::span<const double> y, std::span<double> out) {
  const std::size_t n = out.size();
  if (a.size() != n || x.size() != n || b.size() != n || y.size() != n)
    throw DimensionError("combine: length mismatch");
  active().combine(a.data(), x.data(), b.data(), y.data(), out.data(), n);
}

double weighted_sumsq(std::span<const double> w, std::span<const double> x) {
  if (w.size() != x.size()) throw DimensionError("weighted_sumsq: length mismatch");
  return active().weighted_sumsq(w.data(), x.data(), x.size());
}

}  // namespace ebm2::kernels
