#pragma once

#include "bubbledec/geometry.hpp"

#include <Eigen/Dense>

namespace bubbledec {

/// A uniform tensor grid on the cube [-radius, radius]^dimension. Sample
/// vectors are stored in lexicographic order with axis 0 slowest.
struct GridSpec {
  double radius = 8.0;
  int points_per_axis = 33;
  int dimension = 3;

  double spacing() const { return 2.0 * radius / (points_per_axis - 1); }
  long total_points() const {
    long t = 1;
    for (int a = 0; a < dimension; ++a) t *= points_per_axis;
    return t;
  }
  Vector node(long index) const;
};

/// Multilinear interpolant of grid samples, zero outside the cube; the
/// gradient is the exact derivative of the interpolant within each cell.
struct GridInterpolant {
  GridSpec grid;
  Eigen::ArrayXd values;

  double value(const Vector& xi) const;
  Vector gradient(const Vector& xi) const;
};

}  // namespace bubbledec
