#include "ebm2/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ebm2/errors.hpp"
#include "ebm2/kernels.hpp"

namespace ebm2 {

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw DomainError("gauss_legendre: need at least one node");
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi's initial guess, then Newton on P_q.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[q - 1 - i] = x;
    weights[i] = w;
    weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) nodes[q / 2] = 0.0;
}

void legendre_values(double x, int n, double* p, double* dp) {
  if (n <= 0) return;
  p[0] = 1.0;
  if (dp) dp[0] = 0.0;
  if (n == 1) return;
  p[1] = x;
  if (dp) dp[1] = 1.0;
  for (int k = 1; k + 1 < n; ++k) {
    p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1);
    if (dp) dp[k + 1] = dp[k - 1] + (2 * k + 1) * p[k];
  }
}

int SpectralGrid::default_quad(int n_modes) noexcept { return (5 * n_modes + 1) / 2 + 2; }

int SpectralGrid::min_quad(int n_modes) noexcept { return (5 * (n_modes - 1) + 3) / 2; }

GridPtr SpectralGrid::make(int n_modes, int n_quad) {
  if (n_modes < 1) throw DomainError("n_modes must be >= 1");
  if (n_quad == 0) n_quad = default_quad(n_modes);
  if (n_quad < min_quad(n_modes) || n_quad < n_modes)
    throw DomainError("n_quad = " + std::to_string(n_quad) + " is below the exactness floor " +
                      std::to_string(std::max(min_quad(n_modes), n_modes)));
  return GridPtr(new SpectralGrid(n_modes, n_quad));
}

SpectralGrid::SpectralGrid(int n_modes, int n_quad) : n_modes_(n_modes), n_quad_(n_quad) {
  gauss_legendre(n_quad, nodes_, weights_);
  const std::size_t N = n_modes, Q = n_quad;
  eig_.resize(N);
  mass_.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    eig_[n] = double(n) * double(n + 1);
    mass_[n] = 2.0 / (2.0 * n + 1.0);
  }
  analysis_.resize(N * Q);
  synthesis_.resize(Q * N);
  std::vector<double> p(N);
  for (std::size_t j = 0; j < Q; ++j) {
    legendre_values(nodes_[j], n_modes, p.data());
    for (std::size_t n = 0; n < N; ++n) {
      synthesis_[j * N + n] = p[n];
      analysis_[n * Q + j] = (2.0 * n + 1.0) / 2.0 * weights_[j] * p[n];
    }
  }
}

SpectralField::SpectralField(GridPtr g) : grid(std::move(g)) {
  coeffs.assign(grid->n_modes(), 0.0);
}

SpectralField::SpectralField(GridPtr g, std::vector<double> c)
    : grid(std::move(g)), coeffs(std::move(c)) {
  if (coeffs.size() != std::size_t(grid->n_modes()))
    throw DimensionError("SpectralField: " + std::to_string(coeffs.size()) +
                         " coefficients for a grid of " + std::to_string(grid->n_modes()) +
                         " modes");
}

namespace {

// Clenshaw for sum c_n P_n(x).
double clenshaw(std::span<const double> c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    const double alpha = (2.0 * k + 1.0) / (k + 1.0) * x;
    const double beta = -(k + 1.0) / (k + 2.0);
    const double b0 = c[k] + alpha * b1 + beta * b2;
    b2 = b1;
    b1 = b0;
  }
  return b1;
}

}  // namespace

double SpectralField::operator()(double x) const { return clenshaw(coeffs, x); }

double SpectralField::derivative(double x) const {
  const int n = int(coeffs.size());
  std::vector<double> p(n), dp(n);
  legendre_values(x, n, p.data(), dp.data());
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += coeffs[k] * dp[k];
  return s;
}

void analyze_into(std::span<const double> nodal_values, const SpectralGrid& grid,
                  std::span<double> coeffs) {
  if (nodal_values.size() != std::size_t(grid.n_quad()))
    throw DimensionError("analyze: expected " + std::to_string(grid.n_quad()) +
                         " nodal values, got " + std::to_string(nodal_values.size()));
  if (coeffs.size() != std::size_t(grid.n_modes())) throw DimensionError("analyze: bad output");
  kernels::matvec(grid.analysis(), nodal_values, coeffs);
}

SpectralField analyze(std::span<const double> nodal_values, const GridPtr& grid) {
  SpectralField f(grid);
  analyze_into(nodal_values, *grid, f.coeffs);
  return f;
}

void synthesize_into(const SpectralField& field, std::span<double> out) {
  const SpectralGrid& g = *field.grid;
  if (out.size() != std::size_t(g.n_quad()) || field.coeffs.size() != std::size_t(g.n_modes()))
    throw DimensionError("synthesize: size mismatch");
  kernels::matvec(g.synthesis(), field.coeffs, out);
}

std::vector<double> synthesize(const SpectralField& field) {
  std::vector<double> out(field.grid->n_quad());
  synthesize_into(field, out);
  return out;
}

SpectralField apply_A(const SpectralField& field) {
  SpectralField out(field.grid);
  const auto eig = field.grid->eig();
  for (std::size_t n = 0; n < out.coeffs.size(); ++n) out.coeffs[n] = -eig[n] * field.coeffs[n];
  return out;
}

SpectralField semigroup_apply(const SpectralField& field, double s) {
  if (!(s >= 0.0)) throw DomainError("semigroup_apply: s must be >= 0");
  SpectralField out(field.grid);
  const auto eig = field.grid->eig();
  for (std::size_t n = 0; n < out.coeffs.size(); ++n)
    out.coeffs[n] = std::exp(-eig[n] * s) * field.coeffs[n];
  return out;
}

double h_norm(std::span<const double> c, const SpectralGrid& g) {
  return std::sqrt(kernels::weighted_sumsq(g.mass(), c));
}

double dirichlet_form(std::span<const double> c, const SpectralGrid& g) {
  double s = 0.0;
  const auto eig = g.eig();
  const auto mass = g.mass();
  for (std::size_t n = 0; n < c.size(); ++n) s += eig[n] * mass[n] * c[n] * c[n];
  return s;
}

double v_norm(std::span<const double> c, const SpectralGrid& g) {
  const double h = h_norm(c, g);
  return std::sqrt(h * h + dirichlet_form(c, g));
}

NormTriple norms(const SpectralField& field) {
  const SpectralGrid& g = *field.grid;
  double h2 = 0.0, v2 = 0.0, d2 = 0.0;
  for (std::size_t n = 0; n < field.coeffs.size(); ++n) {
    const double e = g.eig()[n];
    const double t = field.coeffs[n] * field.coeffs[n] * g.mass()[n];
    h2 += t;
    v2 += (1.0 + e) * t;
    d2 += (1.0 + e * e) * t;
  }
  return {std::sqrt(h2), std::sqrt(v2), std::sqrt(d2)};
}

std::vector<double> lobatto_points(int n_eval) {
  std::vector<double> x(n_eval);
  for (int k = 0; k < n_eval; ++k) x[k] = -std::cos(std::numbers::pi * k / (n_eval - 1));
  x.front() = -1.0;
  x.back() = 1.0;
  if (n_eval % 2 == 1) x[n_eval / 2] = 0.0;
  return x;
}

double sup_norm(const SpectralField& field, int n_eval) {
  if (n_eval < 64) throw DomainError("sup_norm: n_eval must be >= 64");
  double m = 0.0;
  for (double x : lobatto_points(n_eval)) m = std::max(m, std::abs(field(x)));
  return m;
}

namespace {

// Golden-section search for a local minimum of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

}  // namespace

Range dense_range(const SpectralField& field, int n_eval) {
  if (n_eval < 64) throw DomainError("dense_range: n_eval must be >= 64");
  const auto xs = lobatto_points(n_eval);
  std::vector<double> v(n_eval);
  for (int k = 0; k < n_eval; ++k) v[k] = field(xs[k]);
  Range r{*std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
  // Polish every interior local extremum of the sampled values.
  for (int k = 1; k + 1 < n_eval; ++k) {
    if (v[k] <= v[k - 1] && v[k] <= v[k + 1])
      r.min = std::min(r.min, golden_min([&](double x) { return field(x); }, xs[k - 1], xs[k + 1]));
    if (v[k] >= v[k - 1] && v[k] >= v[k + 1])
      r.max = std::max(r.max, -golden_min([&](double x) { return -field(x); }, xs[k - 1], xs[k + 1]));
  }
  return r;
}

}  // namespace ebm2
