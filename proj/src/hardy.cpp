#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ebm2/errors.hpp"
#include "ebm2/legendre.hpp"

namespace ebm2 {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("hardy: gamma must lie in (0, 1)");
}

// sup of f(y) for y in (0, 1], where y is the distance to the singular endpoint.
// f -> -inf as y -> 0, so the sup is interior or at y = 1.
double sup_near_endpoint(const std::function<double(double)>& f) {
  constexpr int kGrid = 481;
  constexpr double kLogMin = -12.0;
  std::vector<double> ly(kGrid), fy(kGrid);
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    ly[i] = kLogMin * (1.0 - double(i) / (kGrid - 1));
    fy[i] = f(std::pow(10.0, ly[i]));
    if (fy[i] > fy[best]) best = i;
  }
  double a = ly[std::max(best - 1, 0)];
  double b = ly[std::min(best + 1, kGrid - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(std::pow(10.0, c)), fd = f(std::pow(10.0, d));
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(std::pow(10.0, c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(std::pow(10.0, d));
    }
  }
  return std::max({fy[best], fc, fd});
}

}  // namespace

double hardy_c_left(double n, double gamma) {
  check_gamma(gamma);
  // x = -1 + y
  return sup_near_endpoint([=](double y) {
    const double x = y - 1.0;
    const double r = y * (2.0 - y);  // 1 - x^2 without cancellation
    return (n + 1.0) / std::pow(r, gamma) + x * (1.0 - gamma) / std::pow(r, 0.5 * (1.0 + gamma));
  });
}

double hardy_c_right(double n, double gamma) {
  check_gamma(gamma);
  // x = 1 - y
  return sup_near_endpoint([=](double y) {
    const double x = 1.0 - y;
    const double r = y * (2.0 - y);
    return (n + 1.0) / std::pow(r, gamma) - x * (1.0 - gamma) / std::pow(r, 0.5 * (1.0 + gamma));
  });
}

double hardy_constant(double n, double gamma) {
  if (!(n > 0.0)) throw DomainError("hardy: n must be > 0");
  return 4.0 + hardy_c_left(n, gamma) + hardy_c_right(n, gamma) + 4.0 * n / 3.0;
}

double hardy_singular_integral(const SpectralField& v, double n, double gamma) {
  check_gamma(gamma);
  // On each half, x = +-(1 - s^k) with k = 1/(1-gamma) cancels the endpoint
  // singularity exactly: the integrand becomes k v^2 (1 +- x)^(-gamma) on s in [0, 1].
  const double k = 1.0 / (1.0 - gamma);
  auto rule = [&](int q) {
    std::vector<double> xs, ws;
    gauss_legendre(q, xs, ws);
    double total = 0.0;
    for (int j = 0; j < q; ++j) {
      const double s = 0.5 * (xs[j] + 1.0);
      const double w = 0.5 * ws[j];
      const double sk = std::pow(s, k);
      const double right = v(1.0 - sk);
      const double left = v(-1.0 + sk);
      total += w * k * (right * right + left * left) * std::pow(2.0 - sk, -gamma);
    }
    return n * total;
  };
  double prev = rule(32);
  for (int q = 64; q <= 16384; q *= 2) {
    const double cur = rule(q);
    if (std::abs(cur - prev) <= 1e-8 * std::abs(cur) || (cur == 0.0 && prev == 0.0)) return cur;
    prev = cur;
  }
  throw AccuracyError("hardy: singular quadrature did not reach relative change 1e-8");
}

HardyResult hardy_check(const SpectralField& v, double n, double gamma) {
  check_gamma(gamma);
  if (!(n > 0.0)) throw DomainError("hardy: n must be > 0");
  const double c = hardy_constant(n, gamma);
  const double lhs = hardy_singular_integral(v, n, gamma);
  const double h = h_norm(v.coeffs, *v.grid);
  const double rhs = dirichlet_form(v.coeffs, *v.grid) + c * h * h;
  return {lhs, rhs, c, lhs <= rhs * (1.0 + 1e-9)};
}

}  // namespace ebm2
