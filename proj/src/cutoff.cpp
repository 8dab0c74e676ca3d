#include "bubbledec/cutoff.hpp"

#include <cmath>

namespace bubbledec {

namespace {

// evaluated in the normalized radius s = rho / r, so the cutoff is exactly
// scale invariant and never underflows at small chart radii
double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double bump_deriv(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

double CutoffSpec::operator()(double rho) const {
  const double s = rho / r;
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double a = bump(1.0 - s);
  const double b = bump(s - 0.5);
  return a / (a + b);
}

double CutoffSpec::radial_derivative(double rho) const {
  const double s = rho / r;
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double a = bump(1.0 - s);
  const double b = bump(s - 0.5);
  const double da = -bump_deriv(1.0 - s);
  const double db = bump_deriv(s - 0.5);
  const double denom = a + b;
  return (da * b - a * db) / (denom * denom) / r;
}

Vector CutoffSpec::grad(const Vector& xi) const {
  const double rho = xi.norm();
  if (rho < 1e-14) return Vector::Zero(xi.size());
  return (radial_derivative(rho) / rho) * xi;
}

CutoffSpec smooth_cutoff(double r) {
  if (!(r > 0)) throw std::invalid_argument("smooth_cutoff: r must be positive");
  return CutoffSpec{r};
}

}  // namespace bubbledec
