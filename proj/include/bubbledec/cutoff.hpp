#pragma once

#include "bubbledec/geometry.hpp"

namespace bubbledec {

/// Radial smooth cutoff: identically 1 for |xi| <= r/2, identically 0 for
/// |xi| >= r, built from the two-bump rational-exponential partition
/// chi = f(r - rho) / (f(r - rho) + f(rho - r/2)), f(t) = exp(-1/t)_+.
struct CutoffSpec {
  double r = 1.0;

  double operator()(double rho) const;
  double radial_derivative(double rho) const;
  double value(const Vector& xi) const { return (*this)(xi.norm()); }
  Vector grad(const Vector& xi) const;
};

CutoffSpec smooth_cutoff(double r);

}  // namespace bubbledec
