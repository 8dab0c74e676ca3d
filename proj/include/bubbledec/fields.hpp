#pragma once

#include "bubbledec/cutoff.hpp"
#include "bubbledec/discretization.hpp"
#include "bubbledec/geometry.hpp"
#include "bubbledec/interpolant.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace bubbledec {

/// One chart-localized piece of a scalar field: an analytic closure
/// f(xi) = (u o e_anchor)(xi) supported in |xi| < support_radius, together
/// with its chart gradient. `level` is the dyadic resolution of the piece
/// (features live at scale ~ 2^{-level}); it orders the multiscale
/// quadrature refinement.
struct FieldComponent {
  Point anchor;
  int level = 0;
  double support_radius = 0.0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

/// A scalar field on M as a finite sum of chart-localized components.
/// Fields carry analytic closures rather than mesh samples so that deep
/// rescaled pullbacks stay exact.
struct ScalarField {
  std::vector<FieldComponent> components;

  double value(const ManifoldModel& m, const Point& x) const;
  /// Components of du at x in the normal chart anchored at x itself.
  Vector chart_gradient(const ManifoldModel& m, const Point& x) const;
  std::vector<Ball> support_hint() const;
  bool is_zero() const { return components.empty(); }
};

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField negate(const ScalarField& a);
ScalarField scale_field(const ScalarField& a, double factor);

/// A k-indexed family of fields.
struct FieldSequence {
  std::function<ScalarField(int)> generator;
  int k_min = 0;
  int k_max = 0;
};

/// Chart-partition quadrature over a working region: a Discretization with
/// rho = r/2 supplies chart centers, a smooth-cutoff partition of unity
/// splits the integrand, and each chart carries a tensor Gauss-Legendre
/// rule weighted by sqrt(g). Component-scale refinement patches are layered
/// on top of this base machinery.
class QuadratureSpec {
 public:
  QuadratureSpec() = default;
  QuadratureSpec(const ManifoldModel& m, const Ball& region, int order,
                 int subdivisions = 6);

  const ManifoldModel& model() const { return model_; }
  const Ball& region() const { return region_; }
  int order() const { return order_; }
  int subdivisions() const { return subdivisions_; }

  struct CoverNode {
    int chart = 0;
    Vector xi;
    double weight = 0.0;  // gauss weight * sqrt(g) * partition weight
  };
  struct Cover {
    std::vector<Vector> chart_offsets;  // chart centers in base-chart coords
    std::vector<CoverNode> nodes;
    double radius = 0.0;
  };

  /// Anchor-invariant multi-chart cover for a ball of the given radius
  /// (cached; radius is bucketed upward).
  std::shared_ptr<const Cover> cover_for_radius(double radius) const;

  /// Partition-of-unity weights of the cover charts at base-chart
  /// coordinate xi (audit hook; sums to 1 on the covered ball).
  std::vector<double> partition_weights(const Cover& cover, const Vector& xi) const;

  /// Composite tensor Gauss-Legendre rule over [-half, half]^N
  /// (`subdivisions` cells per axis, `order` points per cell).
  void cube_rule(double half, std::vector<Vector>& nodes,
                 std::vector<double>& weights) const;
  void cube_rule(double half, int order, int subdivisions,
                 std::vector<Vector>& nodes, std::vector<double>& weights) const;

  /// Ball rule used for chart patches: composite Gauss radial factor times a
  /// Gauss product rule on the sphere (N = 3; higher dimensions fall back to
  /// the cube rule). Radial alignment resolves cutoff bands and radial
  /// profiles much faster than a tensor cube; `angular_boost` multiplies the
  /// spherical resolution when off-center structure crosses the patch.
  void ball_rule(double radius, int order, int subdivisions,
                 std::vector<Vector>& nodes, std::vector<double>& weights,
                 int angular_boost = 1) const;

 private:
  ManifoldModel model_;
  Ball region_;
  int order_ = 12;
  int subdivisions_ = 2;
  CutoffSpec chart_cutoff_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

QuadratureSpec make_quadrature(const ManifoldModel& m, const Ball& region,
                               int order = 12, int subdivisions = 6);

/// Smooth localization window multiplying an integrand: radial cutoff of
/// the given radius around a center.
struct IntegrationWindow {
  Ball ball;
};

/// Pointwise integrand of several fields: receives per-field values and
/// own-chart gradient components. Must vanish when all fields vanish.
using Integrand = std::function<double(std::span<const double>,
                                       std::span<const Vector>)>;

/// Multiscale integral of F(u_1, ..., u_n) over M. Components are visited
/// coarse-to-fine; the increment of each component is integrated on a patch
/// matched to that component's scale, so cross-scale corpora integrate
/// accurately with fixed per-axis order.
double integrate(const ManifoldModel& m, const QuadratureSpec& q,
                 std::span<const ScalarField* const> fields, const Integrand& f,
                 const IntegrationWindow* window = nullptr,
                 bool needs_gradients = false);

/// Per-node visitor variant (used by binned diagnostics). The visitor
/// receives the quadrature weight and the partial-sum field values before
/// and after the current component's contribution.
using NodeVisitor = std::function<void(double weight,
                                       std::span<const double> curr,
                                       std::span<const double> prev)>;
void integrate_visit(const ManifoldModel& m, const QuadratureSpec& q,
                     std::span<const ScalarField* const> fields,
                     const NodeVisitor& visitor,
                     const IntegrationWindow* window = nullptr);

double lp_norm(const ScalarField& u, double p, const QuadratureSpec& q);
double h12_inner(const ScalarField& u, const ScalarField& v,
                 const QuadratureSpec& q);
double h12_norm(const ScalarField& u, const QuadratureSpec& q);
/// sqrt of the Dirichlet integral int |du|^2 dmu.
double grad_seminorm(const ScalarField& u, const QuadratureSpec& q);

/// Samples of xi -> 2^{-j(N-2)/2} u(e_y(2^{-j} xi)) on the reference grid.
Eigen::ArrayXd rescaled_pullback(const ManifoldModel& m, const ScalarField& u,
                                 const Point& y, int j, const GridSpec& grid);

/// Dirichlet energy of grid samples via central differences on interior
/// nodes (flat reference metric). `stride` > 1 evaluates the same energy on
/// the subsampled grid (resolution check for unresolved features).
double grid_h1_energy(const Eigen::ArrayXd& samples, const GridSpec& grid,
                      int stride = 1);
/// int |v|^p dx of grid samples (flat trapezoid-type rule).
double grid_lp_pow(const Eigen::ArrayXd& samples, const GridSpec& grid,
                   double p);
double grid_l2_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                        const GridSpec& grid);

/// Deterministic chunked parallel sum over [0, n); the chunking is fixed so
/// results do not depend on the thread count.
double parallel_sum(long n, const std::function<double(long)>& term);
void parallel_for(long n, const std::function<void(long)>& fn);
void set_max_threads(int n);
int max_threads();

}  // namespace bubbledec
