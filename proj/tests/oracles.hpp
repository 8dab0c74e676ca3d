#pragma once

// Test-only reference computations, independent of the library's own
// integration and geodesic paths.

#include "bubbledec/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using bubbledec::ManifoldKind;
using bubbledec::ManifoldModel;
using bubbledec::Point;
using bubbledec::Vector;

/// RK4 integration of the ambient geodesic equation; v is an ambient
/// tangent vector at x, integrated over unit time.
inline Point geodesic_rk4(const ManifoldModel& m, const Point& x,
                          const Vector& v, int steps = 4096) {
  if (m.kind == ManifoldKind::euclidean) return Point{x.coords + v};
  const double r2 = m.model_radius() * m.model_radius();
  auto accel = [&](const Vector& pos, const Vector& vel) -> Vector {
    if (m.kind == ManifoldKind::sphere) return Vector(-(vel.dot(vel) / r2) * pos);
    // hyperboloid: gamma'' = <gamma', gamma'>_L / R^2 * gamma
    const int n = static_cast<int>(pos.size());
    const double q =
        -vel(0) * vel(0) + vel.tail(n - 1).squaredNorm();
    return Vector((q / r2) * pos);
  };
  Vector p = x.coords, vel = v;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const Vector k1p = vel, k1v = accel(p, vel);
    const Vector k2p = vel + 0.5 * h * k1v, k2v = accel(p + 0.5 * h * k1p, vel + 0.5 * h * k1v);
    const Vector k3p = vel + 0.5 * h * k2v, k3v = accel(p + 0.5 * h * k2p, vel + 0.5 * h * k2v);
    const Vector k4p = vel + h * k3v, k4v = accel(p + h * k3p, vel + h * k3v);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    vel += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return Point{p};
}

/// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, long n = 200001) {
  if (n % 2 == 0) ++n;
  const double h = (b - a) / (n - 1);
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const double coef = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += coef * f(a + i * h);
  }
  return acc * h / 3.0;
}

/// int_M g(d(o, x)) dmu for radial g on the N = 3 models:
/// area(t) = 4 pi sn(t)^2.
inline double radial_integral(const ManifoldModel& m,
                              const std::function<double(double)>& g,
                              double radius) {
  return simpson(
      [&](double t) {
        const double sn = bubbledec::metric_radial_factor(m, t);
        return 4.0 * M_PI * sn * sn * g(t);
      },
      0.0, radius);
}

/// Tensor Gauss-Legendre integral over the cube [-half, half]^3 of a flat
/// integrand (reference route for non-radial Euclidean integrals).
inline double flat_cube_integral(const std::function<double(const Vector&)>& f,
                                 double half, int order = 48) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  std::vector<double> x(order), w(order);
  for (int i = 0; i < order; ++i) {
    x[i] = half * es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    w[i] = 2.0 * half * v0 * v0;
  }
  double acc = 0.0;
  Vector xi(3);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j)
      for (int k = 0; k < order; ++k) {
        xi << x[i], x[j], x[k];
        acc += w[i] * w[j] * w[k] * f(xi);
      }
  return acc;
}

}  // namespace oracles
