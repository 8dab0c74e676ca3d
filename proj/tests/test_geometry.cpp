#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbledec/geometry.hpp"
#include "oracles.hpp"

#include <random>

using namespace bubbledec;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

std::vector<ManifoldModel> all_models() {
  return {ManifoldModel::make_euclidean(3),
          ManifoldModel::make_hyperbolic(3),
          ManifoldModel::make_sphere(3)};
}

Point random_point(const ManifoldModel& m, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector xi = vec3(u(rng), u(rng), u(rng)) * spread;
  return exp_map(m, m.basepoint(), xi);
}

}  // namespace

TEST_CASE("model validation") {
  CHECK(to_string(manifold_kind_from_string("hyperbolic")) == "hyperbolic");
  CHECK_THROWS_AS(manifold_kind_from_string("torus"), std::invalid_argument);
  CHECK_THROWS_AS(ManifoldModel::make_euclidean(2), std::invalid_argument);
  CHECK_THROWS_AS(ManifoldModel::make_hyperbolic(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ManifoldModel::make_sphere(3, 1.0, 1.0), std::invalid_argument);
  // r < r(M)/8 with the working surrogate 16 on non-compact models
  CHECK_THROWS_AS(ManifoldModel::make_euclidean(3, 2.0), std::invalid_argument);
  const auto sphere = ManifoldModel::make_sphere(3);
  CHECK(sphere.injectivity_radius() == doctest::Approx(M_PI));
  CHECK(on_manifold(sphere, sphere.basepoint()));
  const auto hyp = ManifoldModel::make_hyperbolic(3, -2.0);
  CHECK(on_manifold(hyp, hyp.basepoint()));
}

TEST_CASE("exp_map examples") {
  const auto e3 = ManifoldModel::make_euclidean(3);
  const Point x{vec3(1, 2, 0)};
  CHECK((exp_map(e3, x, vec3(0.5, 0, 0)).coords - vec3(1.5, 2, 0)).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));
  for (const auto& m : all_models()) {
    const Point p = exp_map(m, m.basepoint(), vec3(0.1, -0.05, 0.02));
    const Point back = exp_map(m, p, Vector::Zero(3));
    CHECK((back.coords - p.coords).norm() < 1e-14);
  }
}

TEST_CASE("hyperbolic exponential against geodesic integration") {
  const auto m = ManifoldModel::make_hyperbolic(3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = random_point(m, rng, 1.5);
    Vector dir = vec3(u(rng), u(rng), u(rng));
    dir /= dir.norm();
    const double t = 0.3 + trial * 0.2;
    const Point via_exp = exp_map(m, x, t * dir);
    const Point via_ode =
        oracles::geodesic_rk4(m, x, parallel_frame(m, x) * (t * dir));
    CHECK((via_exp.coords - via_ode.coords).norm() < 1e-9);
    CHECK(distance(m, x, via_exp) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("log_map examples") {
  const auto e3 = ManifoldModel::make_euclidean(3);
  const Vector l = log_map(e3, Point{vec3(0, 0, 0)}, Point{vec3(3, 4, 0)});
  CHECK((l - vec3(3, 4, 0)).norm() < 1e-15);
  CHECK(l.norm() == doctest::Approx(5.0));
  for (const auto& m : all_models()) {
    const Point x = exp_map(m, m.basepoint(), vec3(0.2, 0.1, -0.1));
    CHECK(log_map(m, x, x).norm() < 1e-12);
  }
  // sphere: point at polar angle 0.7 from the basepoint
  const auto s3 = ManifoldModel::make_sphere(3);
  const Point pole = s3.basepoint();
  Vector y(4);
  y << std::cos(0.7), std::sin(0.7), 0, 0;
  CHECK(log_map(s3, pole, Point{y}).norm() == doctest::Approx(0.7).epsilon(1e-12));
  // cut locus is a domain error
  Point antipode{-pole.coords};
  CHECK_THROWS_AS(log_map(s3, pole, antipode), std::domain_error);
  CHECK_THROWS_AS(exp_map(s3, pole, vec3(3.2, 0, 0)), std::domain_error);
}

TEST_CASE("distance examples and axioms") {
  const auto e3 = ManifoldModel::make_euclidean(3);
  CHECK(distance(e3, Point{vec3(0, 0, 0)}, Point{vec3(3, 4, 0)}) ==
        doctest::Approx(5.0));
  std::mt19937_64 rng(5);
  for (const auto& m : all_models()) {
    for (int i = 0; i < 100; ++i) {
      const Point a = random_point(m, rng, 1.2);
      const Point b = random_point(m, rng, 1.2);
      const Point c = random_point(m, rng, 1.2);
      CHECK(distance(m, a, a) < 1e-12);
      CHECK(distance(m, a, b) == doctest::Approx(distance(m, b, a)).epsilon(1e-12));
      CHECK(distance(m, a, c) <= distance(m, a, b) + distance(m, b, c) + 1e-9);
    }
  }
  // hyperbolic: distance along a geodesic equals the parameter
  const auto hyp = ManifoldModel::make_hyperbolic(3);
  const Point x = random_point(hyp, rng, 1.0);
  for (double t : {0.25, 0.75, 1.5, 3.0}) {
    const Point y = exp_map(hyp, x, vec3(t, 0, 0));
    const Point y_ode = oracles::geodesic_rk4(hyp, x, parallel_frame(hyp, x) * vec3(t, 0, 0));
    CHECK(distance(hyp, x, y_ode) == doctest::Approx(t).epsilon(1e-8));
    CHECK(distance(hyp, x, y) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("metric in normal coordinates") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto e3 = ManifoldModel::make_euclidean(3);
  for (int i = 0; i < 5; ++i) {
    const auto g = metric_in_normal_coords(e3, e3.basepoint(),
                                           vec3(u(rng), u(rng), u(rng)));
    CHECK((g.g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(g.sqrt_det == doctest::Approx(1.0));
  }
  for (const auto& m : all_models()) {
    const auto g0 = metric_in_normal_coords(m, m.basepoint(), Vector::Zero(3));
    CHECK((g0.g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  // hyperbolic: radial component 1, tangential (sinh rho / rho)^2
  const auto hyp = ManifoldModel::make_hyperbolic(3);
  const Vector xi = vec3(0.4, -0.3, 0.5);
  const double rho = xi.norm();
  const auto g = metric_in_normal_coords(hyp, random_point(hyp, rng, 1.0), xi);
  const Vector er = xi / rho;
  CHECK(er.dot(g.g * er) == doctest::Approx(1.0).epsilon(1e-12));
  Vector perp = vec3(er(1), -er(0), 0);
  perp -= er.dot(perp) * er;
  perp /= perp.norm();
  const double tangential = std::pow(std::sinh(rho) / rho, 2);
  CHECK(perp.dot(g.g * perp) == doctest::Approx(tangential).epsilon(1e-12));
  CHECK(g.sqrt_det == doctest::Approx(std::pow(std::sinh(rho) / rho, 2)).epsilon(1e-12));
  // out-of-chart is a domain error on the sphere
  const auto s3 = ManifoldModel::make_sphere(3);
  CHECK_THROWS_AS(metric_in_normal_coords(s3, s3.basepoint(), vec3(3.5, 0, 0)),
                  std::domain_error);
}

TEST_CASE("metric consistency with finite-difference jacobians") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : all_models()) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Point x = random_point(m, rng, 0.8);
      const Vector xi = vec3(u(rng), u(rng), u(rng)) * 0.5;
      const auto closed = metric_in_normal_coords(m, x, xi);
      const auto fd = metric_in_normal_coords_fd(m, x, xi, 1e-4);
      worst = std::max(worst, (closed.g - fd.g).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("round trip and radial isometry over random charts") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : all_models()) {
    double worst_rt = 0.0, worst_d = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Point x = random_point(m, rng, 0.8);
      Vector xi = vec3(u(rng), u(rng), u(rng));
      xi *= m.chart_radius / std::max(1.0, xi.norm());
      const Point y = exp_map(m, x, xi);
      worst_rt = std::max(worst_rt, (log_map(m, x, y) - xi).norm());
      worst_d = std::max(worst_d, std::abs(distance(m, x, y) - xi.norm()));
    }
    CHECK(worst_rt < 1e-9);
    CHECK(worst_d < 1e-9);
  }
}

TEST_CASE("transition maps") {
  const auto e3 = ManifoldModel::make_euclidean(3);
  const Point x{vec3(0.2, 0, 0)}, y{vec3(-0.1, 0.3, 0)};
  const Vector xi = vec3(0.05, -0.1, 0.2);
  CHECK((transition_map(e3, x, y, xi) - (xi + x.coords - y.coords)).norm() < 1e-14);
  CHECK((transition_map(e3, x, x, xi) - xi).norm() < 1e-15);

  const auto hyp = ManifoldModel::make_hyperbolic(3);
  const Point hx = hyp.basepoint();
  const Point hy = exp_map(hyp, hx, vec3(0.3, 0, 0));
  CHECK(transition_map(hyp, hx, hy, Vector::Zero(3)).norm() ==
        doctest::Approx(0.3).epsilon(1e-12));
  // |psi_yx(0)| = d(x, y) generally
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const Point a = random_point(hyp, rng, 0.5);
    const Point b = exp_map(hyp, a, vec3(0.2, 0.1, -0.15));
    CHECK(transition_map(hyp, a, b, Vector::Zero(3)).norm() ==
          doctest::Approx(distance(hyp, a, b)).epsilon(1e-10));
  }
  // leaving the overlap is a domain error
  const Point far = exp_map(hyp, hx, vec3(5.0, 0, 0));
  CHECK_THROWS_AS(transition_map(hyp, hx, far, Vector::Zero(3)), std::domain_error);
}

TEST_CASE("transition map derivative bounds over overlapping charts") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-4;
  for (const auto& m : all_models()) {
    const double a = 0.5 * m.chart_radius;
    double worst1 = 0.0, worst2 = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
      const Point x = random_point(m, rng, 0.6);
      Vector off = vec3(u(rng), u(rng), u(rng));
      off *= a / std::max(1.0, off.norm() / 0.99);
      const Point y = exp_map(m, x, off);
      const Vector xi =
          vec3(u(rng), u(rng), u(rng)) * (0.2 * m.chart_radius);
      for (int axis = 0; axis < 3; ++axis) {
        Vector e = Vector::Zero(3);
        e(axis) = h;
        const Vector fwd = transition_map(m, x, y, xi + e);
        const Vector bwd = transition_map(m, x, y, xi - e);
        const Vector mid = transition_map(m, x, y, xi);
        worst1 = std::max(worst1, ((fwd - bwd) / (2 * h)).norm());
        worst2 = std::max(worst2, ((fwd - 2 * mid + bwd) / (h * h)).norm());
      }
    }
    CHECK(worst1 < 2.0);   // first derivatives stay near isometric
    CHECK(worst2 < 5.0);   // curvature-scale second derivatives
  }
}

TEST_CASE("parallel frames and transport") {
  std::mt19937_64 rng(41);
  for (const auto& m : all_models()) {
    const Point x = random_point(m, rng, 0.9);
    const Point y = random_point(m, rng, 0.9);
    const Matrix f = parallel_frame(m, x);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(tangent_inner(m.kind, f.col(a), f.col(b)) ==
              doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Vector ta = parallel_transport(m, x, y, f.col(a));
        const Vector tb = parallel_transport(m, x, y, f.col(b));
        CHECK(tangent_inner(m.kind, ta, tb) ==
              doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
      }
  }
}

TEST_CASE("own-chart gradients match finite differences") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : all_models()) {
    const Point anchor = random_point(m, rng, 0.5);
    const ChartFrame chart(m, anchor);
    auto f = [](const Vector& xi) {
      return std::exp(-xi.squaredNorm()) * (1.0 + xi(0));
    };
    auto grad_f = [](const Vector& xi) {
      Vector g = -2.0 * xi * std::exp(-xi.squaredNorm()) * (1.0 + xi(0));
      g(0) += std::exp(-xi.squaredNorm());
      return g;
    };
    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
      const Vector xi = vec3(u(rng), u(rng), u(rng)) * 0.4;
      const Point x = chart.exp(xi);
      const Vector own = gradient_to_own_chart(m, anchor, xi, grad_f(xi));
      const double h = 1e-5;
      for (int axis = 0; axis < 3; ++axis) {
        Vector e = Vector::Zero(3);
        e(axis) = h;
        const double fd = (f(log_map(m, anchor, exp_map(m, x, e))) -
                           f(log_map(m, anchor, exp_map(m, x, -e)))) /
                          (2 * h);
        worst = std::max(worst, std::abs(fd - own(axis)));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("isometries") {
  std::mt19937_64 rng(47);
  for (const auto& m : all_models()) {
    for (int axis = 0; axis < 3; ++axis) {
      const Isometry iso = axis_transvection(m, axis, 0.7);
      CHECK(displacement(m, iso) == doctest::Approx(0.7).epsilon(1e-12));
      const Isometry round = compose(iso, inverse(iso));
      const Point p = random_point(m, rng, 1.0);
      CHECK((apply(round, p).coords - p.coords).norm() < 1e-12);
      const Point q = random_point(m, rng, 1.0);
      CHECK(distance(m, apply(iso, p), apply(iso, q)) ==
            doctest::Approx(distance(m, p, q)).epsilon(1e-11));
      CHECK(on_manifold(m, apply(iso, p), 1e-9));
    }
  }
  const auto e3 = ManifoldModel::make_euclidean(3);
  const Isometry shift = axis_transvection(e3, 1, -2.5);
  CHECK((apply(shift, Point{vec3(1, 1, 1)}).coords - vec3(1, -1.5, 1)).norm() < 1e-14);
}
