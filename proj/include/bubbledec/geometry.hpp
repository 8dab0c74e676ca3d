#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bubbledec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ManifoldKind { euclidean, hyperbolic, sphere };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

/// A point on a model manifold, in ambient coordinates: Cartesian R^N for
/// the flat model, hyperboloid coordinates in R^{N+1} (Minkowski norm -R^2,
/// positive time component) for the hyperbolic model, and embedded-sphere
/// coordinates in R^{N+1} (|x| = R) for the sphere.
struct Point {
  Vector coords;
};

/// Metric components g_ab in a normal chart, together with sqrt(det g).
struct MetricAtPoint {
  Matrix g;
  double sqrt_det = 1.0;
};

/// One of the preset constant-curvature models. All charts are normal
/// charts e_x = exp_x composed with the orthonormal frame at x obtained by
/// parallel transport of a reference frame at the model basepoint along the
/// radial geodesic (the frame convention recorded in run manifests).
struct ManifoldModel {
  ManifoldKind kind = ManifoldKind::euclidean;
  int dimension = 3;
  double curvature = 0.0;
  double chart_radius = 1.0;

  int ambient_dimension() const;
  /// 1/sqrt(|curvature|); +inf for the flat model.
  double model_radius() const;
  /// True injectivity radius: pi*R for the sphere, +inf otherwise.
  double injectivity_radius() const;
  /// Finite surrogate used for the chart_radius < r(M)/8 bookkeeping.
  double working_injectivity_radius() const;
  Point basepoint() const;
  void validate() const;

  static ManifoldModel make_euclidean(int n, double chart_radius = 1.0);
  static ManifoldModel make_hyperbolic(int n, double curvature = -1.0,
                                       double chart_radius = 1.0);
  static ManifoldModel make_sphere(int n, double curvature = 1.0,
                                   double chart_radius = 0.3);
};

/// Checks the model's defining ambient constraint at tolerance tol.
bool on_manifold(const ManifoldModel& m, const Point& x, double tol = 1e-12);

/// e_x(xi): normal-chart exponential at x applied to chart coordinates xi.
Point exp_map(const ManifoldModel& m, const Point& x, const Vector& xi);

/// e_x^{-1}(y): chart coordinates of y in the normal chart at x.
Vector log_map(const ManifoldModel& m, const Point& x, const Point& y);

double distance(const ManifoldModel& m, const Point& x, const Point& y);

/// Metric components and volume factor at e_x(xi) in the normal chart at x.
/// g(0) is the identity exactly.
MetricAtPoint metric_in_normal_coords(const ManifoldModel& m, const Point& x,
                                      const Vector& xi);

/// Same metric computed from finite-difference columns of exp_map; an
/// implementation-independent route used by consistency checks and the
/// atlas module.
MetricAtPoint metric_in_normal_coords_fd(const ManifoldModel& m,
                                         const Point& x, const Vector& xi,
                                         double step = 1e-4);

/// psi_{yx}(xi) = e_y^{-1}(e_x(xi)); domain error when e_x(xi) leaves the
/// chart of y.
Vector transition_map(const ManifoldModel& m, const Point& x, const Point& y,
                      const Vector& xi);

/// Orthonormal frame at x (ambient columns): the identification i_x.
Matrix parallel_frame(const ManifoldModel& m, const Point& x);

/// Parallel transport of the ambient tangent vector v along the geodesic
/// from x to y.
Vector parallel_transport(const ManifoldModel& m, const Point& x,
                          const Point& y, const Vector& v);

/// Tangential radius factor sn(rho) of the metric in normal coordinates:
/// rho, R sinh(rho/R) or R sin(rho/R).
double metric_radial_factor(const ManifoldModel& m, double rho);

/// (sn(rho)/rho)^(N-1).
double metric_sqrt_det(const ManifoldModel& m, double rho);

/// Given grad f of a chart closure f = u o e_y at xi, returns the components
/// of du at x = e_y(xi) expressed in the normal chart anchored at x itself,
/// so that |du|_g^2(x) is the plain squared norm of the result.
Vector gradient_to_own_chart(const ManifoldModel& m, const Point& y,
                             const Vector& xi, const Vector& grad_f);

/// Ambient inner product used for tangent vectors (Minkowski for the
/// hyperbolic model, Euclidean otherwise).
double tangent_inner(ManifoldKind kind, const Vector& a, const Vector& b);

/// Normal chart at a fixed anchor with the frame precomputed, for repeated
/// evaluations at the same anchor.
class ChartFrame {
 public:
  ChartFrame() = default;
  ChartFrame(const ManifoldModel& m, const Point& anchor);

  const Point& anchor() const { return anchor_; }
  Point exp(const Vector& xi) const;
  Vector log(const Point& x) const;
  /// Ambient covariant gradient of u at e(xi), given the chart gradient of
  /// the closure u o e at xi.
  Vector ambient_gradient(const Vector& xi, const Vector& grad_f) const;
  /// Frame coefficients of an ambient tangent vector at the anchor.
  Vector coefficients(const Vector& tangent) const;

 private:
  ManifoldModel model_;
  Point anchor_;
  Matrix frame_;
  bool flat_ = true;
};

/// A model isometry, stored as an ambient linear map plus a translation
/// part (the latter nonzero only for the flat model).
struct Isometry {
  ManifoldKind kind = ManifoldKind::euclidean;
  Matrix linear;
  Vector offset;
};

Point apply(const Isometry& iso, const Point& x);
Isometry inverse(const Isometry& iso);
Isometry compose(const Isometry& a, const Isometry& b);
Isometry identity_isometry(const ManifoldModel& m);

/// Transvection through the basepoint along coordinate axis `axis` by signed
/// geodesic distance t: a translation (flat), a Lorentz boost (hyperbolic)
/// or a rotation (sphere).
Isometry axis_transvection(const ManifoldModel& m, int axis, double t);

/// d(eta(o), o) for the model basepoint o.
double displacement(const ManifoldModel& m, const Isometry& iso);

}  // namespace bubbledec
