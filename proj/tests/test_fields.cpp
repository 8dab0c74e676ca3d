#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbledec/bubbles.hpp"
#include "bubbledec/fields.hpp"
#include "oracles.hpp"

#include <random>

using namespace bubbledec;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

ScalarField radial_field(const ManifoldModel& m, const Point& anchor,
                         const ProfileSpec& prof, double amplitude = 1.0) {
  FieldComponent c;
  c.anchor = anchor;
  c.level = 0;
  c.support_radius = prof.support;
  c.value = [prof, amplitude](const Vector& xi) {
    return amplitude * prof.value(xi);
  };
  c.gradient = [prof, amplitude](const Vector& xi) {
    return Vector(amplitude * prof.gradient(xi));
  };
  ScalarField f;
  f.components.push_back(std::move(c));
  return f;
}

/// Smooth non-radial test field: gaussian tapered to zero by the cutoff.
ScalarField gaussian_cutoff_field(const ManifoldModel& m, const Point& anchor,
                                  const Vector& tilt, double support) {
  const CutoffSpec cut = smooth_cutoff(support);
  FieldComponent c;
  c.anchor = anchor;
  c.level = 0;
  c.support_radius = support;
  c.value = [cut, tilt](const Vector& xi) {
    return std::exp(-xi.squaredNorm()) * (1.0 + tilt.dot(xi)) * cut.value(xi);
  };
  c.gradient = [cut, tilt](const Vector& xi) {
    const double g = std::exp(-xi.squaredNorm());
    const double poly = 1.0 + tilt.dot(xi);
    Vector grad = g * (Vector(tilt) - 2.0 * poly * xi) * cut.value(xi);
    grad += g * poly * cut.grad(xi);
    return grad;
  };
  ScalarField f;
  f.components.push_back(std::move(c));
  return f;
}

}  // namespace

TEST_CASE("partition of unity sums to one over the covered ball") {
  const auto m = ManifoldModel::make_euclidean(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);
  auto cover = q.cover_for_radius(2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vector xi = vec3(u(rng), u(rng), u(rng));
    xi *= 2.0 / std::max(1.0, xi.norm() / 0.99);
    const auto w = q.partition_weights(*cover, xi);
    double sum = 0.0;
    for (double wi : w) sum += wi;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("lp_norm examples") {
  const auto m = ManifoldModel::make_euclidean(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);
  const auto prof = make_profile("bump", 2.0, 3);

  SUBCASE("zero amplitude gives zero norm") {
    const ScalarField z = radial_field(m, m.basepoint(), prof, 0.0);
    CHECK(lp_norm(z, 2.0, q) == 0.0);
    CHECK(lp_norm(ScalarField{}, 2.0, q) == 0.0);
  }

  SUBCASE("radial bump against the 1d radial oracle") {
    const ScalarField f = radial_field(m, m.basepoint(), prof);
    for (double p : {1.0, 2.0, 3.0, 6.0}) {
      const double expected = std::pow(
          oracles::radial_integral(
              m, [&](double t) { return std::pow(prof.radial(t), p); }, 2.0),
          1.0 / p);
      CHECK(lp_norm(f, p, q) == doctest::Approx(expected).epsilon(1e-6));
    }
  }

  SUBCASE("hyperbolic radial bump against the volume-weighted oracle") {
    const auto hyp = ManifoldModel::make_hyperbolic(3);
    QuadratureSpec qh(hyp, Ball{hyp.basepoint(), 3.0}, 12);
    const ScalarField f = radial_field(hyp, hyp.basepoint(), prof);
    const double expected = std::sqrt(oracles::radial_integral(
        hyp, [&](double t) { return std::pow(prof.radial(t), 2.0); }, 2.0));
    CHECK(lp_norm(f, 2.0, qh) == doctest::Approx(expected).epsilon(1e-6));
  }

  SUBCASE("critical norm of a rescaled bubble is scale invariant") {
    const auto cut = smooth_cutoff(1.0);
    const auto b = make_bubble(make_profile("bump", 4.0, 3), m.basepoint(),
                               [](int k) { return k; });
    const double m4 = lp_norm(synth_bubble(m, b, cut, 4), 6.0, q);
    const double m9 = lp_norm(synth_bubble(m, b, cut, 9), 6.0, q);
    CHECK(m4 == doctest::Approx(m9).epsilon(1e-12));
  }

  CHECK_THROWS_AS(lp_norm(radial_field(m, m.basepoint(), prof), 0.5, q),
                  std::invalid_argument);
}

TEST_CASE("h12 inner products") {
  const auto m = ManifoldModel::make_euclidean(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);

  SUBCASE("positivity") {
    const ScalarField f =
        gaussian_cutoff_field(m, m.basepoint(), vec3(0.3, -0.1, 0.2), 2.0);
    CHECK(h12_inner(f, f, q) > 0.0);
    CHECK(h12_inner(ScalarField{}, ScalarField{}, q) == 0.0);
  }

  SUBCASE("disjoint supports give exactly zero") {
    const auto prof = make_profile("bump", 1.0, 3);
    const ScalarField a = radial_field(m, Point{vec3(-1.5, 0, 0)}, prof);
    const ScalarField b = radial_field(m, Point{vec3(1.5, 0, 0)}, prof);
    CHECK(h12_inner(a, b, q) == 0.0);
  }

  SUBCASE("gaussian-cutoff pair against the flat reference rule") {
    const ScalarField a =
        gaussian_cutoff_field(m, Point{vec3(0.3, 0, 0)}, vec3(0.2, 0, -0.1), 2.0);
    const ScalarField b =
        gaussian_cutoff_field(m, Point{vec3(-0.4, 0.2, 0)}, vec3(0, 0.3, 0), 2.0);
    const auto& ca = a.components[0];
    const auto& cb = b.components[0];
    const Vector xa = ca.anchor.coords, xb = cb.anchor.coords;
    const double expected = oracles::flat_cube_integral(
        [&](const Vector& x) {
          const Vector xia = x - xa, xib = x - xb;
          if (xia.norm() >= 2.0 || xib.norm() >= 2.0) return 0.0;
          return ca.value(xia) * cb.value(xib) +
                 ca.gradient(xia).dot(cb.gradient(xib));
        },
        3.0, 96);
    CHECK(h12_inner(a, b, q) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("grad seminorm") {
  const auto m = ManifoldModel::make_euclidean(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);
  CHECK(grad_seminorm(ScalarField{}, q) == 0.0);

  const auto prof = make_profile("bump", 2.0, 3);
  const ScalarField f = radial_field(m, m.basepoint(), prof);
  const double expected = std::sqrt(oracles::radial_integral(
      m,
      [&](double t) { return std::pow(prof.radial_derivative(t), 2.0); },
      2.0));
  CHECK(grad_seminorm(f, q) == doctest::Approx(expected).epsilon(1e-6));

  // exact dyadic scaling invariance of the Dirichlet seminorm
  const auto cut = smooth_cutoff(1.0);
  const auto b = make_bubble(make_profile("bump", 4.0, 3), m.basepoint(),
                             [](int k) { return k; });
  const double g5 = grad_seminorm(synth_bubble(m, b, cut, 5), q);
  const double g8 = grad_seminorm(synth_bubble(m, b, cut, 8), q);
  CHECK(g5 == doctest::Approx(g8).epsilon(1e-12));
}

TEST_CASE("rescaled pullbacks") {
  const auto m = ManifoldModel::make_euclidean(3);
  const GridSpec grid{8.0, 17, 3};

  SUBCASE("zero field pulls back to zero") {
    const auto pb = rescaled_pullback(m, ScalarField{}, m.basepoint(), 3, grid);
    CHECK(pb.abs().maxCoeff() == 0.0);
  }

  SUBCASE("level zero reproduces the field in normal coordinates") {
    const auto prof = make_profile("bump", 2.0, 3);
    const ScalarField f = radial_field(m, m.basepoint(), prof);
    const auto pb = rescaled_pullback(m, f, m.basepoint(), 0, grid);
    for (long i = 0; i < grid.total_points(); ++i)
      CHECK(pb(i) == doctest::Approx(prof.value(grid.node(i))).epsilon(1e-12));
  }

  SUBCASE("bubble pullback converges to the cutoff-truncated profile") {
    const auto prof = make_profile("bump", 4.0, 3);
    const auto cut = smooth_cutoff(1.0);
    const auto b = make_bubble(prof, m.basepoint(), [](int k) { return k; });
    for (int k : {6, 10}) {
      const ScalarField w = synth_bubble(m, b, cut, k);
      const auto pb = rescaled_pullback(m, w, m.basepoint(), k, grid);
      double worst = 0.0;
      for (long i = 0; i < grid.total_points(); ++i) {
        const Vector xi = grid.node(i);
        const double expected =
            cut(std::pow(2.0, -k) * xi.norm()) * prof.value(xi);
        worst = std::max(worst, std::abs(pb(i) - expected));
      }
      CHECK(worst < 1e-12);
    }
  }

  SUBCASE("grid exceeding the chart is a domain error") {
    const auto s3 = ManifoldModel::make_sphere(3);
    const ScalarField f;
    CHECK_THROWS_AS(rescaled_pullback(s3, f, s3.basepoint(), 0, grid),
                    std::domain_error);
  }
}

TEST_CASE("quadrature convergence under order doubling") {
  const auto m = ManifoldModel::make_hyperbolic(3);
  QuadratureSpec q12(m, Ball{m.basepoint(), 3.0}, 12);
  QuadratureSpec q24(m, Ball{m.basepoint(), 3.0}, 24);
  const auto cut = smooth_cutoff(1.0);
  const auto prof = make_profile("bump", 4.0, 3);
  const auto bgprof = make_profile("bump", 2.0, 3);
  ScalarField corpus = radial_field(m, m.basepoint(), bgprof, 0.4);
  const auto b = make_bubble(prof, exp_map(m, m.basepoint(), vec3(0.6, 0, 0)),
                             [](int k) { return k; });
  corpus = add(corpus, synth_bubble(m, b, cut, 6));
  for (double p : {2.0, 6.0}) {
    const double coarse = lp_norm(corpus, p, q12);
    const double fine = lp_norm(corpus, p, q24);
    CHECK(std::abs(coarse - fine) < 1e-6 * std::max(1.0, fine));
  }
  const double h_coarse = h12_inner(corpus, corpus, q12);
  const double h_fine = h12_inner(corpus, corpus, q24);
  CHECK(std::abs(h_coarse - h_fine) < 1e-6 * std::max(1.0, h_fine));
}

TEST_CASE("chart-coordinate and manifold norms are uniformly comparable") {
  const auto m = ManifoldModel::make_hyperbolic(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);
  const double a = 0.5;
  const auto prof = make_profile("bump", a, 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double p = 2.0;
  double worst_ratio = 1.0;
  for (int i = 0; i < 100; ++i) {
    const Point center =
        exp_map(m, m.basepoint(), vec3(u(rng), u(rng), u(rng)) * 1.5);
    const ScalarField f = radial_field(m, center, prof);
    const double manifold_norm = std::pow(lp_norm(f, p, q), p);
    // chart-coordinate norm: flat integral of the chart closure
    const double chart_norm = oracles::simpson(
        [&](double t) {
          return 4.0 * M_PI * t * t * std::pow(prof.radial(t), p);
        },
        0.0, a, 20001);
    const double ratio = manifold_norm / chart_norm;
    worst_ratio = std::max(worst_ratio, std::max(ratio, 1.0 / ratio));
  }
  MESSAGE("worst chart/manifold L2 mass ratio at a = 0.5: ", worst_ratio);
  CHECK(worst_ratio < 1.2);
}

TEST_CASE("analytic gradients match finite differences on corpus fields") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : {ManifoldModel::make_euclidean(3),
                        ManifoldModel::make_hyperbolic(3)}) {
    const auto cut = smooth_cutoff(1.0);
    ScalarField f = gaussian_cutoff_field(
        m, exp_map(m, m.basepoint(), vec3(0.2, -0.3, 0.1)), vec3(0.4, 0, 0.2),
        2.0);
    const auto b = make_bubble(make_profile("aubin_talenti", 4.0, 3),
                               m.basepoint(), [](int k) { return k; });
    f = add(f, synth_bubble(m, b, cut, 4));
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
      const Point x =
          exp_map(m, m.basepoint(), vec3(u(rng), u(rng), u(rng)) * 0.6);
      const Vector grad = f.chart_gradient(m, x);
      const double h = 1e-5;
      for (int axis = 0; axis < 3; ++axis) {
        Vector e = Vector::Zero(3);
        e(axis) = h;
        const double fd =
            (f.value(m, exp_map(m, x, e)) - f.value(m, exp_map(m, x, -e))) /
            (2 * h);
        worst = std::max(worst, std::abs(fd - grad(axis)));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("unbounded support is rejected") {
  const auto m = ManifoldModel::make_euclidean(3);
  QuadratureSpec q(m, Ball{m.basepoint(), 3.0}, 12);
  FieldComponent c;
  c.anchor = m.basepoint();
  c.level = 0;
  c.support_radius = std::numeric_limits<double>::infinity();
  c.value = [](const Vector&) { return 1.0; };
  c.gradient = [](const Vector& xi) { return Vector::Zero(xi.size()); };
  ScalarField f;
  f.components.push_back(c);
  CHECK_THROWS_AS(lp_norm(f, 2.0, q), std::invalid_argument);
}
