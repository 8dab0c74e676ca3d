#include "bubbledec/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bubbledec {

namespace {

/// Quasi-uniform direction set on S^{N-1} with angular resolution ~ theta.
/// N = 3 uses a Fibonacci sphere; other dimensions fall back to a normalized
/// cube-surface lattice.
std::vector<Vector> directions(int n, double theta) {
  std::vector<Vector> out;
  if (n == 3) {
    const int m = std::max(6, static_cast<int>(std::ceil(15.0 / (theta * theta))));
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    out.reserve(m);
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / m;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double az = golden * i;
      Vector d(3);
      d << rr * std::cos(az), rr * std::sin(az), z;
      out.push_back(d);
    }
    return out;
  }
  const int L = std::max(1, static_cast<int>(std::ceil(1.8 / theta)));
  std::vector<int> idx(n, -L);
  // every lattice point of the cube surface max|p_i| = L, normalized
  std::vector<int> p(n, -L);
  while (true) {
    int maxabs = 0;
    for (int a = 0; a < n; ++a) maxabs = std::max(maxabs, std::abs(p[a]));
    if (maxabs == L) {
      Vector d(n);
      for (int a = 0; a < n; ++a) d(a) = p[a];
      out.push_back(d / d.norm());
    }
    int a = n - 1;
    while (a >= 0 && p[a] == L) p[a--] = -L;
    if (a < 0) break;
    ++p[a];
  }
  return out;
}

}  // namespace

std::vector<Point> sample_region(const ManifoldModel& m, const Ball& region,
                                 double delta) {
  std::vector<Point> out;
  out.push_back(region.center);
  const double rmax = std::min(region.radius, m.injectivity_radius() * 0.9999);
  const bool whole_sphere = m.kind == ManifoldKind::sphere &&
                            region.radius >= m.injectivity_radius();
  const int shells = std::max(1, static_cast<int>(std::ceil(rmax / delta)));
  for (int i = 1; i <= shells; ++i) {
    const double s = std::min(rmax, i * delta);
    const double theta = delta / metric_radial_factor(m, s);
    if (theta >= M_PI) continue;
    for (const Vector& d : directions(m.dimension, theta))
      out.push_back(exp_map(m, region.center, s * d));
  }
  if (whole_sphere) {
    Point antipode{-region.center.coords};
    out.push_back(antipode);
  }
  return out;
}

Discretization build_discretization(const ManifoldModel& m, double rho,
                                    const Ball& region, double padding) {
  if (!(rho > 0)) throw std::invalid_argument("build_discretization: rho must be positive");
  if (!std::isfinite(region.radius))
    throw std::invalid_argument("build_discretization: region radius must be finite");
  Ball padded = region;
  if (padding < 0)
    padding = std::isfinite(m.injectivity_radius()) ? 0.0 : 2.0 * rho;
  padded.radius += padding;  // working-region padding on non-compact models
  padded.radius = std::min(padded.radius, m.injectivity_radius() * 0.9999);

  const std::vector<Point> cand = sample_region(m, padded, 0.35 * rho);
  const double stop = 0.75 * rho;

  Discretization d;
  d.rho = rho;
  d.region = region;
  d.points.push_back(region.center);
  std::vector<double> mind(cand.size());
  for (size_t i = 0; i < cand.size(); ++i)
    mind[i] = distance(m, region.center, cand[i]);
  while (true) {
    size_t best = 0;
    for (size_t i = 1; i < cand.size(); ++i)
      if (mind[i] > mind[best]) best = i;
    if (mind[best] <= stop) break;
    d.points.push_back(cand[best]);
    for (size_t i = 0; i < cand.size(); ++i)
      mind[i] = std::min(mind[i], distance(m, cand[best], cand[i]));
  }
  return d;
}

int covering_multiplicity(const ManifoldModel& m, const Discretization& d,
                          double a, double grid_spacing) {
  if (a < d.rho)
    throw std::invalid_argument("covering_multiplicity: requires a >= rho");
  if (grid_spacing <= 0) grid_spacing = d.rho / 8.0;
  int worst = 0;
  for (const Point& t : sample_region(m, d.region, grid_spacing)) {
    int count = 0;
    for (const Point& y : d.points)
      if (distance(m, t, y) <= a) ++count;
    worst = std::max(worst, count);
  }
  return worst;
}

TrailingOrdering trailing_ordering(const ManifoldModel& m,
                                   const Discretization& d, const Point& base) {
  if (d.points.empty())
    throw std::invalid_argument("trailing_ordering: empty net");
  std::vector<double> dist(d.points.size());
  for (size_t i = 0; i < d.points.size(); ++i)
    dist[i] = distance(m, base, d.points[i]);
  TrailingOrdering out;
  out.base = base;
  out.order.resize(d.points.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  return out;
}

double covering_radius(const ManifoldModel& m, const Discretization& d,
                       double grid_spacing) {
  if (grid_spacing <= 0) grid_spacing = d.rho / 8.0;
  double worst = 0.0;
  for (const Point& t : sample_region(m, d.region, grid_spacing)) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& y : d.points) {
      best = std::min(best, distance(m, t, y));
      if (best <= worst) break;  // cannot raise the maximum
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double net_separation(const ManifoldModel& m, const Discretization& d) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < d.points.size(); ++i)
    for (size_t j = i + 1; j < d.points.size(); ++j)
      best = std::min(best, distance(m, d.points[i], d.points[j]));
  return best;
}

}  // namespace bubbledec
