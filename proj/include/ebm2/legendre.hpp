#pragma once

// Legendre spectral representation on I = (-1, 1).
//
// The degenerate operator A u = ((1 - x^2) u')' is diagonal in the Legendre
// basis (A P_n = -n(n+1) P_n), and every P_n already satisfies the natural
// no-flux condition at the poles, so no boundary rows are needed.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ebm2 {

class SpectralGrid;
using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Gauss-Legendre nodes/weights and the transform matrices for degrees 0..N-1.
class SpectralGrid {
 public:
  /// n_quad = 0 picks the default ceil(5N/2) + 2, which integrates the quartic
  /// nonlinearity against a degree N-1 test function exactly.
  static GridPtr make(int n_modes, int n_quad = 0);
  static int default_quad(int n_modes) noexcept;
  static int min_quad(int n_modes) noexcept;

  int n_modes() const noexcept { return n_modes_; }
  int n_quad() const noexcept { return n_quad_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// n(n+1)
  std::span<const double> eig() const noexcept { return eig_; }
  /// ||P_n||^2 = 2/(2n+1)
  std::span<const double> mass() const noexcept { return mass_; }
  /// N x Q row-major, entry (n, j) = (2n+1)/2 w_j P_n(x_j).
  std::span<const double> analysis() const noexcept { return analysis_; }
  /// Q x N row-major, entry (j, n) = P_n(x_j).
  std::span<const double> synthesis() const noexcept { return synthesis_; }

 private:
  SpectralGrid(int n_modes, int n_quad);
  int n_modes_;
  int n_quad_;
  std::vector<double> nodes_, weights_, eig_, mass_, analysis_, synthesis_;
};

/// Gauss-Legendre rule with q points on [-1, 1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

/// P_0..P_{n-1} (and their derivatives when dp is non-null) at x.
void legendre_values(double x, int n, double* p, double* dp = nullptr);

struct SpectralField {
  GridPtr grid;
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(GridPtr g);
  SpectralField(GridPtr g, std::vector<double> c);

  std::size_t size() const noexcept { return coeffs.size(); }
  /// Point evaluation by three-term recurrence; x anywhere in [-1, 1].
  double operator()(double x) const;
  double derivative(double x) const;
};

struct NormTriple {
  double h_norm = 0.0;
  double v_norm = 0.0;
  double da_norm = 0.0;
};

SpectralField analyze(std::span<const double> nodal_values, const GridPtr& grid);
std::vector<double> synthesize(const SpectralField& field);
/// Same as synthesize, writing into a caller buffer of length n_quad.
void synthesize_into(const SpectralField& field, std::span<double> out);
void analyze_into(std::span<const double> nodal_values, const SpectralGrid& grid,
                  std::span<double> coeffs);

SpectralField apply_A(const SpectralField& field);
/// Coefficient n scaled by exp(-n(n+1) s); s is diffusivity times time.
SpectralField semigroup_apply(const SpectralField& field, double s);

NormTriple norms(const SpectralField& field);
double h_norm(std::span<const double> coeffs, const SpectralGrid& grid);
double v_norm(std::span<const double> coeffs, const SpectralGrid& grid);
/// sum n(n+1) c_n^2 ||P_n||^2 = int (1-x^2) u'^2
double dirichlet_form(std::span<const double> coeffs, const SpectralGrid& grid);

/// Chebyshev-Lobatto points -cos(pi k/(n-1)), k = 0..n-1 (endpoints included).
std::vector<double> lobatto_points(int n_eval);

/// max |u| over n_eval Chebyshev-Lobatto points. Nested point sets give
/// non-decreasing values (65 -> 129 -> 257 ...).
double sup_norm(const SpectralField& field, int n_eval = 129);

struct Range {
  double min;
  double max;
};
/// min and max over Chebyshev-Lobatto points, each interior local extremum
/// polished by golden-section search.
Range dense_range(const SpectralField& field, int n_eval = 257);

struct HardyResult {
  double lhs;
  double rhs;
  double constant_used;
  bool holds;
};

/// Hardy-type constant C = 4 + c + c' + 4n/3 built from the one-sided sups.
double hardy_constant(double n, double gamma);
/// sup over (-1, 0] of (n+1)/(1-x^2)^g + x(1-g)/(1-x^2)^((1+g)/2)
double hardy_c_left(double n, double gamma);
/// the mirrored sup over [0, 1)
double hardy_c_right(double n, double gamma);
/// n int v^2/(1-x^2)^g, refined by Gauss-order doubling near the poles.
double hardy_singular_integral(const SpectralField& v, double n, double gamma);
HardyResult hardy_check(const SpectralField& v, double n, double gamma);

}  // namespace ebm2
