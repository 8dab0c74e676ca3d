#pragma once

#include "bubbledec/geometry.hpp"

#include <functional>
#include <vector>

namespace bubbledec {

struct Ball {
  Point center;
  double radius = 0.0;
};

/// A rho-separated covering net of a bounded region: pairwise separation
/// >= rho/2 and every region point within rho of some net point.
struct Discretization {
  double rho = 0.0;
  std::vector<Point> points;
  Ball region;
};

/// Ordering of a net by distance from a base point; ties broken by index.
struct TrailingOrdering {
  Point base;
  std::vector<int> order;
};

/// Deterministic candidate cloud with geodesic spacing ~ delta over the
/// ball. Shared by net construction and coverage audits.
std::vector<Point> sample_region(const ManifoldModel& m, const Ball& region,
                                 double delta);

/// Greedy farthest-point net seeded at the region center. Non-compact
/// models are padded by 2*rho beyond the declared region (pass padding >= 0
/// to override the default).
Discretization build_discretization(const ManifoldModel& m, double rho,
                                    const Ball& region, double padding = -1.0);

/// Maximum number of net balls of radius a covering any single test point
/// (dense-grid estimate; spacing defaults to rho/8).
int covering_multiplicity(const ManifoldModel& m, const Discretization& d,
                          double a, double grid_spacing = 0.0);

TrailingOrdering trailing_ordering(const ManifoldModel& m,
                                   const Discretization& d, const Point& base);

/// Worst distance from a dense region grid to the net (coverage audit).
double covering_radius(const ManifoldModel& m, const Discretization& d,
                       double grid_spacing = 0.0);

/// Smallest pairwise distance in the net.
double net_separation(const ManifoldModel& m, const Discretization& d);

}  // namespace bubbledec
