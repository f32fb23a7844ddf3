#include "ebm2/model.hpp"

#include <algorithm>
#include <cmath>

#include "ebm2/errors.hpp"

namespace ebm2 {

Coalbedo Coalbedo::constant(double b) {
  Coalbedo c;
  c.kind = Kind::constant;
  c.beta_min = c.beta_max = b;
  return c;
}

Coalbedo Coalbedo::ramp(double beta_min, double beta_max, double t_low, double t_high) {
  Coalbedo c;
  c.kind = Kind::ramp;
  c.beta_min = beta_min;
  c.beta_max = beta_max;
  c.t_low = t_low;
  c.t_high = t_high;
  return c;
}

double Coalbedo::value(double u) const {
  if (kind == Kind::constant) return beta_min;
  const double s = std::clamp((u - t_low) / (t_high - t_low), 0.0, 1.0);
  return beta_min + (beta_max - beta_min) * s * s * (3.0 - 2.0 * s);
}

double Coalbedo::slope(double u) const {
  if (kind == Kind::constant) return 0.0;
  const double w = t_high - t_low;
  const double s = std::clamp((u - t_low) / w, 0.0, 1.0);
  return 6.0 * (beta_max - beta_min) / w * s * (1.0 - s);
}

double Coalbedo::sup() const { return std::max(std::abs(beta_min), std::abs(beta_max)); }

double Coalbedo::lipschitz() const {
  if (kind == Kind::constant) return 0.0;
  return 1.5 * std::abs(beta_max - beta_min) / (t_high - t_low);
}

bool Coalbedo::is_zero() const { return beta_min == 0.0 && beta_max == 0.0; }

kernels::RampCoeffs Coalbedo::kernel_coeffs() const {
  if (kind == Kind::constant) return {beta_min, 0.0, 0.0, 1.0};
  return {beta_min, beta_max - beta_min, t_low, 1.0 / (t_high - t_low)};
}

QShape QShape::constant_shape(double q0) {
  QShape q;
  q.q0 = q0;
  return q;
}

QShape QShape::make_p2(double q0, double s2) {
  QShape q;
  q.kind = Kind::p2;
  q.q0 = q0;
  q.s2 = s2;
  return q;
}

QShape QShape::make_bump(double q0, double center, double width) {
  QShape q;
  q.kind = Kind::bump;
  q.q0 = q0;
  q.center = center;
  q.width = width;
  return q;
}

double QShape::value(double x) const {
  switch (kind) {
    case Kind::constant:
      return q0;
    case Kind::p2:
      return q0 * (1.0 + s2 * 0.5 * (3.0 * x * x - 1.0));
    case Kind::bump: {
      const double z = (x - center) / width;
      if (std::abs(z) >= 1.0) return 0.0;
      return q0 * std::exp(1.0 - 1.0 / (1.0 - z * z));
    }
    case Kind::nodal:
      break;
  }
  throw UnsupportedError("QShape::value: nodal shapes are only defined at grid nodes");
}

double QShape::min_value() const {
  switch (kind) {
    case Kind::constant:
      return q0;
    case Kind::p2:  // P_2 ranges over [-1/2, 1]
      return std::min(q0 * (1.0 - 0.5 * s2), q0 * (1.0 + s2));
    case Kind::bump:
      if (center - width > -1.0 || center + width < 1.0) return std::min(0.0, q0);
      return std::min(value(-1.0), value(1.0));
    case Kind::nodal:
      return nodal.empty() ? 0.0 : *std::min_element(nodal.begin(), nodal.end());
  }
  return 0.0;
}

double QShape::max_value() const {
  switch (kind) {
    case Kind::constant:
      return q0;
    case Kind::p2:
      return std::max(q0 * (1.0 - 0.5 * s2), q0 * (1.0 + s2));
    case Kind::bump: {
      const double c = std::clamp(center, -1.0, 1.0);
      return std::max(value(c), 0.0);
    }
    case Kind::nodal:
      return nodal.empty() ? 0.0 : *std::max_element(nodal.begin(), nodal.end());
  }
  return 0.0;
}

Forcing Forcing::make(GridPtr grid, QShape shape) {
  Forcing f;
  f.grid = grid;
  if (shape.kind == QShape::Kind::nodal) {
    if (shape.nodal.size() != std::size_t(grid->n_quad()))
      throw DimensionError("nodal q needs one value per quadrature node");
    f.q_nodal = shape.nodal;
  } else {
    f.q_nodal.resize(grid->n_quad());
    for (int j = 0; j < grid->n_quad(); ++j) f.q_nodal[j] = shape.value(grid->nodes()[j]);
  }
  f.q = analyze(f.q_nodal, grid);
  f.shape = std::move(shape);
  return f;
}

double Forcing::r(double t) const {
  if (r_kind == RKind::constant) return r0;
  return r0 * (1.0 + r_delta * std::sin(r_omega * t));
}

double Forcing::r_min() const { return r_kind == RKind::constant ? r0 : r0 * (1.0 - r_delta); }
double Forcing::r_max() const { return r_kind == RKind::constant ? r0 : r0 * (1.0 + r_delta); }

double Forcing::r_lipschitz() const {
  return r_kind == RKind::constant ? 0.0 : r0 * r_delta * std::abs(r_omega);
}

double Forcing::q_min() const { return shape.min_value(); }
double Forcing::q_max() const { return shape.max_value(); }

StateVec::StateVec(SpectralField a, SpectralField s) : t_a(std::move(a)), t_s(std::move(s)) {
  if (t_a.grid != t_s.grid) throw DimensionError("StateVec: components on different grids");
}

StateVec::StateVec(const GridPtr& g) : t_a(g), t_s(g) {}

StateVec StateVec::constant(const GridPtr& g, double a, double s) {
  StateVec v(g);
  v.t_a.coeffs[0] = a;
  v.t_s.coeffs[0] = s;
  return v;
}

StateVec StateVec::from_packed(const GridPtr& g, std::span<const double> packed) {
  const std::size_t n = g->n_modes();
  if (packed.size() != 2 * n) throw DimensionError("StateVec: packed length mismatch");
  StateVec v(g);
  std::copy(packed.begin(), packed.begin() + n, v.t_a.coeffs.begin());
  std::copy(packed.begin() + n, packed.end(), v.t_s.coeffs.begin());
  return v;
}

std::vector<double> StateVec::packed() const {
  std::vector<double> out(t_a.coeffs);
  out.insert(out.end(), t_s.coeffs.begin(), t_s.coeffs.end());
  return out;
}

std::vector<std::string> validate(const ModelParams& p, const Forcing& f) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const char* what) {
    if (!ok) v.emplace_back(what);
  };
  need(p.gamma_a > 0.0 && std::isfinite(p.gamma_a), "params: gamma_a > 0");
  need(p.gamma_s > 0.0 && std::isfinite(p.gamma_s), "params: gamma_s > 0");
  need(p.kappa_a > 0.0 && std::isfinite(p.kappa_a), "params: kappa_a > 0");
  need(p.kappa_s > 0.0 && std::isfinite(p.kappa_s), "params: kappa_s > 0");
  need(p.sigma_b > 0.0 && std::isfinite(p.sigma_b), "params: sigma_b > 0");
  if (p.decoupled)
    need(p.eps_a >= 0.0 && std::isfinite(p.eps_a), "params: eps_a >= 0 (decoupled)");
  else
    need(p.eps_a > 0.0 && std::isfinite(p.eps_a), "params: eps_a > 0");
  need(p.lambda >= 0.0 && std::isfinite(p.lambda), "params: lambda >= 0");

  auto check_beta = [&](const Coalbedo& b, const char* lo, const char* mono, const char* width) {
    need(b.beta_min >= 0.0 && std::isfinite(b.beta_min), lo);
    if (b.kind == Coalbedo::Kind::ramp) {
      need(b.beta_max >= b.beta_min && std::isfinite(b.beta_max), mono);
      need(b.t_high > b.t_low, width);
    }
  };
  check_beta(f.beta_a, "coalbedo: beta_a >= 0", "coalbedo: beta_a nondecreasing",
             "coalbedo: beta_a t_high > t_low");
  check_beta(f.beta_s, "coalbedo: beta_s >= 0", "coalbedo: beta_s nondecreasing",
             "coalbedo: beta_s t_high > t_low");

  bool q_ok = !f.q_nodal.empty();
  for (double q : f.q_nodal) q_ok = q_ok && q >= 0.0 && std::isfinite(q);
  need(q_ok, "forcing: q >= 0");
  need(f.r0 > 0.0 && std::isfinite(f.r0), "forcing: r0 > 0");
  if (f.r_kind == Forcing::RKind::sinusoidal) {
    need(f.r_delta >= 0.0 && f.r_delta < 1.0, "forcing: 0 <= r_delta < 1");
    need(std::isfinite(f.r_omega), "forcing: r_omega finite");
  }
  return v;
}

Model::Model(ModelParams params, Forcing forcing, ReactionTerms terms)
    : params_(params), forcing_(std::move(forcing)), terms_(terms) {
  if (!forcing_.grid) throw InputError("Model: forcing has no grid");
  coeffs_.inv_gamma_a = 1.0 / params_.gamma_a;
  coeffs_.inv_gamma_s = 1.0 / params_.gamma_s;
  coeffs_.lambda = terms_ == ReactionTerms::none ? 0.0 : params_.lambda;
  if (terms_ == ReactionTerms::full) {
    coeffs_.eps_sigma = params_.eps_a * params_.sigma_b;
    coeffs_.sigma = params_.sigma_b;
    coeffs_.beta_a = forcing_.beta_a.kernel_coeffs();
    coeffs_.beta_s = forcing_.beta_s.kernel_coeffs();
  } else {
    coeffs_.beta_a = coeffs_.beta_s = kernels::RampCoeffs{};
  }
}

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw OverflowError(std::string(what) + ": non-finite nodal value");
}

}  // namespace

void Model::nodal_G(double t, std::span<const double> ua, std::span<const double> us,
                    std::span<double> ga, std::span<double> gs) const {
  const std::size_t q = forcing_.q_nodal.size();
  if (ua.size() != q || us.size() != q || ga.size() != q || gs.size() != q)
    throw DimensionError("nodal_G: size mismatch");
  std::vector<double> fr(q);
  const double r = forcing_.r(t);
  for (std::size_t j = 0; j < q; ++j) fr[j] = r * forcing_.q_nodal[j];
  kernels::active().reaction(coeffs_, ua.data(), us.data(), fr.data(), ga.data(), gs.data(), q);
  check_finite(ga, "G_a");
  check_finite(gs, "G_s");
}

void Model::eval_G_packed(double t, std::span<const double> packed, std::span<double> out) const {
  const SpectralGrid& g = *grid();
  const std::size_t n = g.n_modes(), q = g.n_quad();
  if (packed.size() != 2 * n || out.size() != 2 * n) throw DimensionError("eval_G: size mismatch");
  std::vector<double> buf(4 * q);
  std::span<double> ua(buf.data(), q), us(buf.data() + q, q), ga(buf.data() + 2 * q, q),
      gs(buf.data() + 3 * q, q);
  kernels::matvec(g.synthesis(), packed.subspan(0, n), ua);
  kernels::matvec(g.synthesis(), packed.subspan(n, n), us);
  check_finite(ua, "T_a");
  check_finite(us, "T_s");
  nodal_G(t, ua, us, ga, gs);
  kernels::matvec(g.analysis(), ga, out.subspan(0, n));
  kernels::matvec(g.analysis(), gs, out.subspan(n, n));
}

StateVec Model::eval_G(double t, const StateVec& state) const {
  const auto p = state.packed();
  std::vector<double> out(p.size());
  eval_G_packed(t, p, out);
  return StateVec::from_packed(state.grid(), out);
}

NodalJacobian Model::eval_G_jacobian(const StateVec& state, double t) const {
  const std::size_t q = forcing_.q_nodal.size();
  const auto ua = synthesize(state.t_a);
  const auto us = synthesize(state.t_s);
  NodalJacobian j{std::vector<double>(q), std::vector<double>(q), std::vector<double>(q),
                  std::vector<double>(q)};
  std::vector<double> fr(q);
  const double r = forcing_.r(t);
  for (std::size_t k = 0; k < q; ++k) fr[k] = r * forcing_.q_nodal[k];
  kernels::active().reaction_jacobian(coeffs_, ua.data(), us.data(), fr.data(), j.daa.data(),
                                      j.das.data(), j.dsa.data(), j.dss.data(), q);
  return j;
}

double Model::g_time_lipschitz_bound() const {
  if (terms_ != ReactionTerms::full) return 0.0;
  const double ba = forcing_.beta_a.sup() / params_.gamma_a;
  const double bs = forcing_.beta_s.sup() / params_.gamma_s;
  const double qsup = std::max(std::abs(forcing_.q_max()), std::abs(forcing_.q_min()));
  return std::sqrt(2.0) * forcing_.r_lipschitz() * qsup * std::sqrt(ba * ba + bs * bs);
}

StateVec eval_G(double t, const StateVec& state, const ModelParams& params,
                const Forcing& forcing) {
  return Model(params, forcing).eval_G(t, state);
}

NodalJacobian eval_G_jacobian(const StateVec& state, double t, const ModelParams& params,
                              const Forcing& forcing) {
  return Model(params, forcing).eval_G_jacobian(state, t);
}

double g_time_lipschitz_bound(const Forcing& forcing, const ModelParams& params) {
  return Model(params, forcing).g_time_lipschitz_bound();
}

}  // namespace ebm2
