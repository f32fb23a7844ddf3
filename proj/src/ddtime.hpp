#pragma once

namespace ebm2::detail {

// Time carried as an unevaluated sum hi + lo. Near a quartic escape the
// accepted steps fall below one ulp of t; plain accumulation would stall.
struct DDTime {
  double hi = 0.0, lo = 0.0;
  void add(double h) {
    const double s = hi + h;
    const double bb = s - hi;
    const double err = (hi - (s - bb)) + (h - bb);
    lo += err;
    hi = s + lo;
    lo -= hi - s;
  }
  double minus(double x) const { return (hi - x) + lo; }
  double value() const { return hi + lo; }
};

}  // namespace ebm2::detail
