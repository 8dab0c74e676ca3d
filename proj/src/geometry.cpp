#include "bubbledec/geometry.hpp"

#include <cmath>
#include <limits>

namespace bubbledec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-14;

double mink(const Vector& a, const Vector& b) {
  return -a(0) * b(0) + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

double ambient_inner(ManifoldKind kind, const Vector& a, const Vector& b) {
  return kind == ManifoldKind::hyperbolic ? mink(a, b) : a.dot(b);
}

/// Rescale ambient coordinates back onto the model constraint set.
Point renormalize(const ManifoldModel& m, Point p) {
  const double r = m.model_radius();
  if (m.kind == ManifoldKind::sphere) {
    p.coords *= r / p.coords.norm();
  } else if (m.kind == ManifoldKind::hyperbolic) {
    const double q = -mink(p.coords, p.coords);
    p.coords *= r / std::sqrt(q);
  }
  return p;
}

Point exp_ambient(const ManifoldModel& m, const Point& x, const Vector& v) {
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean:
      return Point{x.coords + v};
    case ManifoldKind::sphere: {
      const double len = v.norm();
      if (len < kTiny) return x;
      const double theta = len / r;
      return renormalize(
          m, Point{std::cos(theta) * x.coords + (r * std::sin(theta) / len) * v});
    }
    case ManifoldKind::hyperbolic: {
      const double len = std::sqrt(std::max(0.0, mink(v, v)));
      if (len < kTiny) return x;
      const double theta = len / r;
      return renormalize(
          m, Point{std::cosh(theta) * x.coords + (r * std::sinh(theta) / len) * v});
    }
  }
  throw std::logic_error("unreachable");
}

Vector log_ambient(const ManifoldModel& m, const Point& x, const Point& y) {
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean:
      return y.coords - x.coords;
    case ManifoldKind::sphere: {
      const double c =
          std::clamp(x.coords.dot(y.coords) / (r * r), -1.0, 1.0);
      const double d = r * std::acos(c);
      Vector u = y.coords - c * x.coords;
      const double un = u.norm();
      if (un < kTiny) {
        if (d > 0.5 * m.injectivity_radius())
          throw std::domain_error("log_map: point at the cut locus");
        return Vector::Zero(x.coords.size());
      }
      return (d / un) * u;
    }
    case ManifoldKind::hyperbolic: {
      const double c = std::max(1.0, -mink(x.coords, y.coords) / (r * r));
      const double d = r * std::acosh(c);
      Vector u = y.coords - c * x.coords;
      const double un = std::sqrt(std::max(0.0, mink(u, u)));
      if (un < kTiny) return Vector::Zero(x.coords.size());
      return (d / un) * u;
    }
  }
  throw std::logic_error("unreachable");
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::euclidean: return "euclidean";
    case ManifoldKind::hyperbolic: return "hyperbolic";
    case ManifoldKind::sphere: return "sphere";
  }
  return "?";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "euclidean") return ManifoldKind::euclidean;
  if (name == "hyperbolic") return ManifoldKind::hyperbolic;
  if (name == "sphere") return ManifoldKind::sphere;
  throw std::invalid_argument("unknown manifold kind: " + name);
}

int ManifoldModel::ambient_dimension() const {
  return kind == ManifoldKind::euclidean ? dimension : dimension + 1;
}

double ManifoldModel::model_radius() const {
  if (kind == ManifoldKind::euclidean) return kInf;
  return 1.0 / std::sqrt(std::abs(curvature));
}

double ManifoldModel::injectivity_radius() const {
  if (kind == ManifoldKind::sphere) return M_PI * model_radius();
  return kInf;
}

double ManifoldModel::working_injectivity_radius() const {
  const double r = injectivity_radius();
  return std::isfinite(r) ? r : 16.0;
}

Point ManifoldModel::basepoint() const {
  Vector c = Vector::Zero(ambient_dimension());
  if (kind != ManifoldKind::euclidean) c(0) = model_radius();
  return Point{c};
}

void ManifoldModel::validate() const {
  if (dimension < 3) throw std::invalid_argument("manifold dimension must be >= 3");
  switch (kind) {
    case ManifoldKind::euclidean:
      if (curvature != 0.0) throw std::invalid_argument("euclidean model requires curvature 0");
      break;
    case ManifoldKind::hyperbolic:
      if (curvature >= 0.0) throw std::invalid_argument("hyperbolic model requires curvature < 0");
      break;
    case ManifoldKind::sphere:
      if (curvature <= 0.0) throw std::invalid_argument("sphere model requires curvature > 0");
      break;
  }
  if (!(chart_radius > 0.0) ||
      chart_radius >= working_injectivity_radius() / 8.0)
    throw std::invalid_argument("chart_radius must satisfy 0 < r < r(M)/8");
}

ManifoldModel ManifoldModel::make_euclidean(int n, double chart_radius) {
  ManifoldModel m{ManifoldKind::euclidean, n, 0.0, chart_radius};
  m.validate();
  return m;
}

ManifoldModel ManifoldModel::make_hyperbolic(int n, double curvature, double chart_radius) {
  ManifoldModel m{ManifoldKind::hyperbolic, n, curvature, chart_radius};
  m.validate();
  return m;
}

ManifoldModel ManifoldModel::make_sphere(int n, double curvature, double chart_radius) {
  ManifoldModel m{ManifoldKind::sphere, n, curvature, chart_radius};
  m.validate();
  return m;
}

bool on_manifold(const ManifoldModel& m, const Point& x, double tol) {
  if (x.coords.size() != m.ambient_dimension()) return false;
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean: return x.coords.allFinite();
    case ManifoldKind::sphere: return std::abs(x.coords.squaredNorm() - r * r) <= tol;
    case ManifoldKind::hyperbolic:
      return std::abs(mink(x.coords, x.coords) + r * r) <= tol && x.coords(0) > 0;
  }
  return false;
}

double distance(const ManifoldModel& m, const Point& x, const Point& y) {
  // chord forms stay accurate down to coincident points, where the
  // acos/acosh forms lose half the working precision
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean: return (x.coords - y.coords).norm();
    case ManifoldKind::sphere: {
      const double chord = (x.coords - y.coords).norm();
      return 2.0 * r * std::asin(std::min(1.0, chord / (2.0 * r)));
    }
    case ManifoldKind::hyperbolic: {
      const Vector diff = x.coords - y.coords;
      const double q = std::max(0.0, mink(diff, diff));
      return 2.0 * r * std::asinh(std::sqrt(q) / (2.0 * r));
    }
  }
  throw std::logic_error("unreachable");
}

double tangent_inner(ManifoldKind kind, const Vector& a, const Vector& b) {
  return ambient_inner(kind, a, b);
}

Vector parallel_transport(const ManifoldModel& m, const Point& x,
                          const Point& y, const Vector& v) {
  if (m.kind == ManifoldKind::euclidean) return v;
  const double d = distance(m, x, y);
  if (d < kTiny) return v;
  const Vector lxy = log_ambient(m, x, y);
  const Vector lyx = log_ambient(m, y, x);
  const double coef = ambient_inner(m.kind, lxy, v) / (d * d);
  return v - coef * (lxy + lyx);
}

Matrix parallel_frame(const ManifoldModel& m, const Point& x) {
  const int n = m.dimension;
  const int an = m.ambient_dimension();
  Matrix frame(an, n);
  if (m.kind == ManifoldKind::euclidean) {
    frame = Matrix::Identity(n, n);
    return frame;
  }
  const Point o = m.basepoint();
  for (int a = 0; a < n; ++a) {
    Vector e = Vector::Zero(an);
    e(a + 1) = 1.0;
    frame.col(a) = parallel_transport(m, o, x, e);
  }
  return frame;
}

Point exp_map(const ManifoldModel& m, const Point& x, const Vector& xi) {
  check_finite(xi, "exp_map");
  if (m.kind == ManifoldKind::euclidean) return Point{x.coords + xi};
  const double len = xi.norm();
  if (len >= m.injectivity_radius())
    throw std::domain_error("exp_map: |xi| exceeds the injectivity radius");
  if (len < kTiny) return x;
  return exp_ambient(m, x, parallel_frame(m, x) * xi);
}

Vector log_map(const ManifoldModel& m, const Point& x, const Point& y) {
  if (m.kind == ManifoldKind::euclidean) return y.coords - x.coords;
  if (distance(m, x, y) >= m.injectivity_radius())
    throw std::domain_error("log_map: point beyond the cut locus");
  const Vector l = log_ambient(m, x, y);
  const Matrix frame = parallel_frame(m, x);
  Vector xi(m.dimension);
  for (int a = 0; a < m.dimension; ++a)
    xi(a) = ambient_inner(m.kind, frame.col(a), l);
  return xi;
}

ChartFrame::ChartFrame(const ManifoldModel& m, const Point& anchor)
    : model_(m),
      anchor_(anchor),
      flat_(m.kind == ManifoldKind::euclidean) {
  if (!flat_) frame_ = parallel_frame(m, anchor);
}

Point ChartFrame::exp(const Vector& xi) const {
  if (flat_) return Point{anchor_.coords + xi};
  if (xi.norm() < kTiny) return anchor_;
  return exp_ambient(model_, anchor_, frame_ * xi);
}

Vector ChartFrame::log(const Point& x) const {
  if (flat_) return x.coords - anchor_.coords;
  const Vector l = log_ambient(model_, anchor_, x);
  Vector xi(model_.dimension);
  for (int a = 0; a < model_.dimension; ++a)
    xi(a) = ambient_inner(model_.kind, frame_.col(a), l);
  return xi;
}

Vector ChartFrame::ambient_gradient(const Vector& xi, const Vector& grad_f) const {
  if (flat_) return grad_f;
  const double rho = xi.norm();
  Vector g_scaled = grad_f;
  if (rho >= kTiny) {
    const Vector er = xi / rho;
    const Vector par = grad_f.dot(er) * er;
    g_scaled = par + (rho / metric_radial_factor(model_, rho)) * (grad_f - par);
  }
  return parallel_transport(model_, anchor_, exp(xi), frame_ * g_scaled);
}

Vector ChartFrame::coefficients(const Vector& tangent) const {
  if (flat_) return tangent;
  Vector out(model_.dimension);
  for (int a = 0; a < model_.dimension; ++a)
    out(a) = ambient_inner(model_.kind, frame_.col(a), tangent);
  return out;
}

double metric_radial_factor(const ManifoldModel& m, double rho) {
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean: return rho;
    case ManifoldKind::sphere: return r * std::sin(rho / r);
    case ManifoldKind::hyperbolic: return r * std::sinh(rho / r);
  }
  throw std::logic_error("unreachable");
}

double metric_sqrt_det(const ManifoldModel& m, double rho) {
  if (rho < kTiny || m.kind == ManifoldKind::euclidean) return 1.0;
  return std::pow(metric_radial_factor(m, rho) / rho, m.dimension - 1);
}

MetricAtPoint metric_in_normal_coords(const ManifoldModel& m, const Point& x,
                                      const Vector& xi) {
  (void)x;  // homogeneous models: the chart metric depends only on |xi|
  const int n = m.dimension;
  const double rho = xi.norm();
  if (rho >= m.injectivity_radius())
    throw std::domain_error("metric_in_normal_coords: out of chart");
  MetricAtPoint out;
  out.g = Matrix::Identity(n, n);
  out.sqrt_det = 1.0;
  if (rho < kTiny || m.kind == ManifoldKind::euclidean) return out;
  const Vector er = xi / rho;
  const double tangential = std::pow(metric_radial_factor(m, rho) / rho, 2);
  out.g = tangential * Matrix::Identity(n, n) +
          (1.0 - tangential) * (er * er.transpose());
  out.sqrt_det = metric_sqrt_det(m, rho);
  return out;
}

MetricAtPoint metric_in_normal_coords_fd(const ManifoldModel& m,
                                         const Point& x, const Vector& xi,
                                         double step) {
  const int n = m.dimension;
  Matrix jac(m.ambient_dimension(), n);
  for (int b = 0; b < n; ++b) {
    Vector e = Vector::Zero(n);
    e(b) = step;
    jac.col(b) =
        (exp_map(m, x, xi + e).coords - exp_map(m, x, xi - e).coords) / (2 * step);
  }
  MetricAtPoint out;
  out.g.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out.g(a, b) = ambient_inner(m.kind, jac.col(a), jac.col(b));
  out.sqrt_det = std::sqrt(std::max(0.0, out.g.determinant()));
  return out;
}

Vector transition_map(const ManifoldModel& m, const Point& x, const Point& y,
                      const Vector& xi) {
  const Point p = exp_map(m, x, xi);
  if (distance(m, y, p) >= m.chart_radius)
    throw std::domain_error("transition_map: image leaves the chart overlap");
  return log_map(m, y, p);
}

Vector gradient_to_own_chart(const ManifoldModel& m, const Point& y,
                             const Vector& xi, const Vector& grad_f) {
  if (m.kind == ManifoldKind::euclidean) return grad_f;
  const ChartFrame chart(m, y);
  const ChartFrame at_point(m, chart.exp(xi));
  return at_point.coefficients(chart.ambient_gradient(xi, grad_f));
}

Point apply(const Isometry& iso, const Point& x) {
  Point out{iso.linear * x.coords};
  if (iso.offset.size() > 0) out.coords += iso.offset;
  return out;
}

Isometry inverse(const Isometry& iso) {
  Isometry out;
  out.kind = iso.kind;
  if (iso.kind == ManifoldKind::hyperbolic) {
    // Lorentz inverse: eta * L^T * eta with eta = diag(-1, 1, ..., 1).
    const int n = static_cast<int>(iso.linear.rows());
    Vector eta = Vector::Ones(n);
    eta(0) = -1.0;
    out.linear = eta.asDiagonal() * iso.linear.transpose() * eta.asDiagonal();
    out.offset = Vector();
  } else {
    out.linear = iso.linear.transpose();
    out.offset = iso.offset.size() > 0 ? Vector(-(out.linear * iso.offset)) : Vector();
  }
  return out;
}

Isometry compose(const Isometry& a, const Isometry& b) {
  Isometry out;
  out.kind = a.kind;
  out.linear = a.linear * b.linear;
  if (a.offset.size() > 0 || b.offset.size() > 0) {
    Vector bo = b.offset.size() > 0 ? b.offset : Vector::Zero(a.linear.rows());
    Vector ao = a.offset.size() > 0 ? a.offset : Vector::Zero(a.linear.rows());
    out.offset = a.linear * bo + ao;
  }
  return out;
}

Isometry identity_isometry(const ManifoldModel& m) {
  Isometry out;
  out.kind = m.kind;
  out.linear = Matrix::Identity(m.ambient_dimension(), m.ambient_dimension());
  if (m.kind == ManifoldKind::euclidean) out.offset = Vector::Zero(m.dimension);
  return out;
}

Isometry axis_transvection(const ManifoldModel& m, int axis, double t) {
  if (axis < 0 || axis >= m.dimension)
    throw std::invalid_argument("axis_transvection: axis out of range");
  Isometry out = identity_isometry(m);
  const double r = m.model_radius();
  switch (m.kind) {
    case ManifoldKind::euclidean:
      out.offset(axis) = t;
      break;
    case ManifoldKind::hyperbolic: {
      const double s = t / r;
      out.linear(0, 0) = std::cosh(s);
      out.linear(0, axis + 1) = std::sinh(s);
      out.linear(axis + 1, 0) = std::sinh(s);
      out.linear(axis + 1, axis + 1) = std::cosh(s);
      break;
    }
    case ManifoldKind::sphere: {
      const double s = t / r;
      out.linear(0, 0) = std::cos(s);
      out.linear(0, axis + 1) = -std::sin(s);
      out.linear(axis + 1, 0) = std::sin(s);
      out.linear(axis + 1, axis + 1) = std::cos(s);
      break;
    }
  }
  return out;
}

double displacement(const ManifoldModel& m, const Isometry& iso) {
  const Point o = m.basepoint();
  return distance(m, o, apply(iso, o));
}

}  // namespace bubbledec
