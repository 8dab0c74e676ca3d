#pragma once

#include "bubbledec/discretization.hpp"
#include "bubbledec/fields.hpp"
#include "bubbledec/geometry.hpp"

#include <vector>

namespace bubbledec {

/// Per-k orderings of a net by distance from a moving base point.
struct TrailingFamily {
  Discretization net;
  std::vector<int> ks;
  std::vector<TrailingOrdering> orderings;  // aligned with ks

  /// The i-th trailing point at the k with index k_index.
  const Point& trailing(int k_index, int i) const;
};

TrailingFamily trailing_family(const ManifoldModel& m, const Discretization& d,
                               const std::function<Point(int)>& base_path,
                               const std::vector<int>& ks);

/// Sampled transition maps psi_{ij,k} between the charts at trailing points
/// i and j, with the largest-k sample standing in for the limit.
struct TransitionLimit {
  int i = 0;
  int j = 0;
  GridSpec grid;  // on the shared coordinate ball Omega_rho
  std::vector<Eigen::MatrixXd> samples_per_k;  // (#nodes x N)
  Eigen::MatrixXd limit_samples;
  double cauchy_gap = 0.0;          // two largest k
  std::vector<double> gaps;         // per k, against the limit sample
};

TransitionLimit transition_sequence(const ManifoldModel& m,
                                    const TrailingFamily& family, int i, int j,
                                    const GridSpec& grid);

/// Chart metric samples at the largest k (finite-difference pushforward of
/// the exponential map) with a cross-k stability gap.
struct LimitMetric {
  int chart = 0;
  GridSpec grid;
  std::vector<Matrix> samples;  // per node
  double stability_gap = 0.0;
};

LimitMetric limit_metric(const ManifoldModel& m, const TrailingFamily& family,
                         int i, const GridSpec& grid);

/// Max-norm defect of the chart-compatibility identity
/// g_i = (D psi_ji)^T (g_j o psi_ji) (D psi_ji) over the usable overlap,
/// with centered finite differences of the sampled transition.
double compatibility_residual(const LimitMetric& gi, const LimitMetric& gj,
                              const TransitionLimit& psi_ji, int k_index);

/// Pairs (i, j), i < j < max_index, whose charts overlap along the whole
/// trailing family (d(y_{k,i}, y_{k,j}) <= 3 rho and within the chart).
std::vector<std::pair<int, int>> atlas_usable_pairs(const ManifoldModel& m,
                                                    const TrailingFamily& family,
                                                    double rho, int max_index);

/// Structured working net for atlas runs: copies of a ball template strung
/// along a transvection axis. A positive dilation decay makes the trailing
/// geometry converge along the drift (slab s is dilated by
/// 1 + dilation * 2^{-s}), so transition maps genuinely settle.
struct OrbitNetConfig {
  int axis = 0;
  double spacing = 0.6;
  int slabs = 14;
  double template_radius = 0.8;
  double template_rho = 0.5;
  double dilation = 0.0;
};

Discretization orbit_lattice_net(const ManifoldModel& m,
                                 const OrbitNetConfig& config);

/// Base path along the orbit axis: k -> slab-k copy of the basepoint.
std::function<Point(int)> orbit_base_path(const ManifoldModel& m,
                                          const OrbitNetConfig& config);

}  // namespace bubbledec
