#include "bubbledec/interpolant.hpp"

#include <cmath>

namespace bubbledec {

Vector GridSpec::node(long index) const {
  Vector xi(dimension);
  const double h = spacing();
  for (int a = dimension - 1; a >= 0; --a) {
    const long i = index % points_per_axis;
    index /= points_per_axis;
    xi(a) = -radius + h * i;
  }
  return xi;
}

namespace {

struct CellLocation {
  bool inside = false;
  std::vector<long> base_index;  // lower corner per axis
  std::vector<double> frac;      // in-cell coordinate per axis
};

CellLocation locate(const GridSpec& g, const Vector& xi) {
  CellLocation loc;
  loc.base_index.resize(g.dimension);
  loc.frac.resize(g.dimension);
  const double h = g.spacing();
  for (int a = 0; a < g.dimension; ++a) {
    const double t = (xi(a) + g.radius) / h;
    if (t < 0.0 || t > g.points_per_axis - 1) return loc;
    long i = static_cast<long>(std::floor(t));
    if (i >= g.points_per_axis - 1) i = g.points_per_axis - 2;
    loc.base_index[a] = i;
    loc.frac[a] = t - i;
  }
  loc.inside = true;
  return loc;
}

}  // namespace

double GridInterpolant::value(const Vector& xi) const {
  const CellLocation loc = locate(grid, xi);
  if (!loc.inside) return 0.0;
  const int n = grid.dimension;
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    long idx = 0;
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      idx = idx * grid.points_per_axis + loc.base_index[a] + bit;
      w *= bit ? loc.frac[a] : 1.0 - loc.frac[a];
    }
    acc += w * values(idx);
  }
  return acc;
}

Vector GridInterpolant::gradient(const Vector& xi) const {
  const CellLocation loc = locate(grid, xi);
  Vector out = Vector::Zero(grid.dimension);
  if (!loc.inside) return out;
  const int n = grid.dimension;
  const double h = grid.spacing();
  for (int corner = 0; corner < (1 << n); ++corner) {
    long idx = 0;
    for (int a = 0; a < n; ++a)
      idx = idx * grid.points_per_axis + loc.base_index[a] + ((corner >> a) & 1);
    const double v = values(idx);
    for (int d = 0; d < n; ++d) {
      double w = 1.0;
      for (int a = 0; a < n; ++a) {
        const int bit = (corner >> a) & 1;
        if (a == d)
          w *= bit ? 1.0 : -1.0;
        else
          w *= bit ? loc.frac[a] : 1.0 - loc.frac[a];
      }
      out(d) += w * v / h;
    }
  }
  return out;
}

}  // namespace bubbledec
