#include "bubbledec/bubbles.hpp"

#include <cmath>

namespace bubbledec {

double ProfileSpec::value(const Vector& xi) const { return radial(xi.norm()); }

Vector ProfileSpec::gradient(const Vector& xi) const {
  const double rho = xi.norm();
  if (rho < 1e-14) return Vector::Zero(xi.size());
  return (radial_derivative(rho) / rho) * xi;
}

ProfileSpec make_profile(const std::string& name, double support, int dimension) {
  if (!(support > 0)) throw std::invalid_argument("profile support must be positive");
  ProfileSpec p;
  p.name = name;
  p.support = support;
  p.dimension = dimension;
  const double s = support;
  if (name == "bump") {
    p.radial = [s](double t) {
      const double q = (t / s) * (t / s);
      return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
    };
    p.radial_derivative = [s](double t) {
      const double q = (t / s) * (t / s);
      if (q >= 1.0) return 0.0;
      const double one = 1.0 - q;
      return -std::exp(-1.0 / one) * (2.0 * t / (s * s)) / (one * one);
    };
  } else if (name == "aubin_talenti") {
    const int n = dimension;
    const double c = n * (n - 2.0);
    const CutoffSpec cut = smooth_cutoff(s);
    p.radial = [c, n, cut](double t) {
      return std::pow(1.0 + t * t / c, -(n - 2.0) / 2.0) * cut(t);
    };
    p.radial_derivative = [c, n, cut](double t) {
      const double base = 1.0 + t * t / c;
      const double u = std::pow(base, -(n - 2.0) / 2.0);
      const double du = -(t / (c / (n - 2.0))) * std::pow(base, -n / 2.0);
      return du * cut(t) + u * cut.radial_derivative(t);
    };
  } else {
    throw std::invalid_argument("unknown profile name: " + name);
  }
  return p;
}

std::vector<std::string> profile_library_names() {
  return {"bump", "aubin_talenti"};
}

BubbleSpec make_bubble(const ProfileSpec& profile, const Point& center,
                       std::function<int(int)> scale_path, double amplitude) {
  BubbleSpec b;
  b.profile_value = [profile](const Vector& xi) { return profile.value(xi); };
  b.profile_gradient = [profile](const Vector& xi) { return profile.gradient(xi); };
  b.profile_support = profile.support;
  b.center_path = [center](int) { return center; };
  b.scale_path = std::move(scale_path);
  b.amplitude = amplitude;
  return b;
}

BubbleSpec make_bubble_from_samples(const GridInterpolant& samples,
                                    const Point& center,
                                    std::function<int(int)> scale_path,
                                    double amplitude) {
  BubbleSpec b;
  b.profile_value = [samples](const Vector& xi) { return samples.value(xi); };
  b.profile_gradient = [samples](const Vector& xi) { return samples.gradient(xi); };
  b.profile_support = samples.grid.radius * std::sqrt(double(samples.grid.dimension));
  b.center_path = [center](int) { return center; };
  b.scale_path = std::move(scale_path);
  b.amplitude = amplitude;
  return b;
}

ScalarField synth_bubble(const ManifoldModel& m, const BubbleSpec& spec,
                         const CutoffSpec& cutoff, int k) {
  const int j = spec.scale_path(k);
  if (j < 0) throw std::invalid_argument("synth_bubble: negative dyadic level");
  const double t = std::pow(2.0, -j);
  const double r = m.chart_radius;
  const Point y = spec.center_path(k);
  const double fac = spec.amplitude * std::pow(2.0, j * (m.dimension - 2) / 2.0);
  const double scaled = std::pow(2.0, j);
  auto w = spec.profile_value;
  auto dw = spec.profile_gradient;
  const CutoffSpec chi = cutoff;

  FieldComponent c;
  c.anchor = y;
  c.level = j;
  c.support_radius = std::min(r, t * spec.profile_support);
  if (!(t * spec.profile_support < r))
    throw std::domain_error("synth_bubble: scale too coarse for the chart");
  c.value = [fac, scaled, w, chi](const Vector& xi) {
    return fac * chi.value(xi) * w(scaled * xi);
  };
  c.gradient = [fac, scaled, w, dw, chi](const Vector& xi) {
    return Vector(fac * (chi.grad(xi) * w(scaled * xi) +
                         chi.value(xi) * scaled * dw(scaled * xi)));
  };
  ScalarField out;
  out.components.push_back(std::move(c));
  return out;
}

ScalarField transform_field(const ManifoldModel& m, const ScalarField& u,
                            const Isometry& eta) {
  const Isometry eta_inv = inverse(eta);
  ScalarField out;
  out.components.reserve(u.components.size());
  for (const FieldComponent& c : u.components) {
    const Point anchor_new = apply(eta, c.anchor);
    // orthogonal frame change O = i_y^* d(eta^{-1}) i_{eta(y)}
    const Matrix frame_old = parallel_frame(m, c.anchor);
    const Matrix frame_new = parallel_frame(m, anchor_new);
    Matrix rot(m.dimension, m.dimension);
    for (int a = 0; a < m.dimension; ++a) {
      const Vector mapped = eta_inv.linear * frame_new.col(a);
      for (int b = 0; b < m.dimension; ++b)
        rot(b, a) = tangent_inner(m.kind, frame_old.col(b), mapped);
    }
    auto v = c.value;
    auto g = c.gradient;
    FieldComponent cn;
    cn.anchor = anchor_new;
    cn.level = c.level;
    cn.support_radius = c.support_radius;
    cn.value = [v, rot](const Vector& xi) { return v(rot * xi); };
    cn.gradient = [g, rot](const Vector& xi) {
      return Vector(rot.transpose() * g(rot * xi));
    };
    out.components.push_back(std::move(cn));
  }
  return out;
}

ScalarField apply_shift(const ManifoldModel& m, const ShiftSpec& spec, int k) {
  // w o eta_k = transform by eta_k^{-1}
  return transform_field(m, spec.profile, inverse(spec.isometry_path(k)));
}

ScalarField synth_sequence(const ManifoldModel& m,
                           const std::vector<BubbleSpec>& bubbles,
                           const std::vector<ShiftSpec>& shifts,
                           const ScalarField& background,
                           const CutoffSpec& cutoff, int k) {
  ScalarField out = background;
  for (const ShiftSpec& s : shifts) out = add(out, apply_shift(m, s, k));
  for (const BubbleSpec& b : bubbles)
    out = add(out, synth_bubble(m, b, cutoff, k));
  return out;
}

double separation_functional(const ManifoldModel& m, const Point& ya, int ja,
                             const Point& yb, int jb) {
  return std::abs(double(ja - jb)) +
         (std::pow(2.0, ja) + std::pow(2.0, jb)) * distance(m, ya, yb);
}

double separation_functional(const ManifoldModel& m, const BubbleSpec& a,
                             const BubbleSpec& b, int k) {
  return separation_functional(m, a.center_path(k), a.scale_path(k),
                               b.center_path(k), b.scale_path(k));
}

}  // namespace bubbledec
