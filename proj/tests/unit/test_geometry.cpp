#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lenspec/errors.hpp"
#include "lenspec/geometry.hpp"

using namespace lenspec;

namespace {

MetricModel bumped_half_plane(double amplitude) {
  return MetricModel::perturbed(MetricModel::half_plane(), {1.0, 0.0}, 1.0, amplitude);
}

// base-metric Laplacian of the conformal exponent by central differences
double laplacian_of_exponent(const MetricModel& m, const ChartPoint& p, double h) {
  auto phi = [&](double du, double dv) {
    return m.conformal_exponent({p.u + du, p.v + dv, p.chart});
  };
  const double c = phi(0, 0);
  const double uu = (phi(h, 0) - 2 * c + phi(-h, 0)) / (h * h);
  const double vv = (phi(0, h) - 2 * c + phi(0, -h)) / (h * h);
  return p.u * p.u * (uu + vv);
}

}  // namespace

TEST_CASE("metric tensors in the two charts") {
  const auto g = metric_at(MetricModel::half_plane(), {2.0, 0.0});
  CHECK(g(0, 0) == doctest::Approx(0.25));
  CHECK(g(1, 1) == doctest::Approx(0.25));
  CHECK(g(0, 1) == 0.0);

  const auto c = metric_at(MetricModel::cylinder(2.0), {0.0, 0.0, ChartId::cylinder});
  CHECK(c(0, 0) == doctest::Approx(1.0));
  CHECK(c(1, 1) == doctest::Approx(std::pow(2.0 / (2 * std::numbers::pi), 2)).epsilon(1e-14));
  CHECK(c(1, 1) == doctest::Approx(0.101321).epsilon(1e-5));

  const auto m = bumped_half_plane(0.1);
  const ChartPoint center{1.0, 0.0};
  CHECK(m.conformal_exponent(center) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(metric_at(m, center)(0, 0) == doctest::Approx(std::exp(0.2)).epsilon(1e-14));
}

TEST_CASE("points outside the chart are rejected") {
  CHECK_FALSE(MetricModel::half_plane().in_domain({-1.0, 0.0}));
  CHECK_THROWS_AS(metric_at(MetricModel::half_plane(), {0.0, 1.0}), DomainError);
}

TEST_CASE("perturbation parameters are validated") {
  CHECK_THROWS_AS(bumped_half_plane(0.25), ConfigError);
  CHECK_THROWS_AS(MetricModel::perturbed(MetricModel::half_plane(), {1.0, 0.0}, -1.0, 0.1),
                  ConfigError);
  CHECK_THROWS_AS(MetricModel::cylinder(0.0), ConfigError);
}

TEST_CASE("constant-curvature models have K = -1") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 3.0);
  for (int i = 0; i < 20; ++i) {
    CHECK(curvature_at(MetricModel::half_plane(), {U(rng), U(rng) - 1.5}) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(curvature_at(MetricModel::cylinder(2.0), {U(rng) - 1.5, U(rng), ChartId::cylinder}) ==
          doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("perturbed curvature matches the conformal formula with a finite-difference Laplacian") {
  const auto m = bumped_half_plane(0.1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> R(0.0, 0.9);
  std::uniform_real_distribution<double> A(0.0, 2 * std::numbers::pi);
  for (int i = 0; i < 10; ++i) {
    // points within hyperbolic distance 0.9 of the centre (1, 0)
    const double d = R(rng);
    const double t = A(rng);
    const double u = std::cosh(d) + std::sinh(d) * std::cos(t);
    const ChartPoint p{1.0 / u, std::sinh(d) * std::sin(t) / u};
    const double phi = m.conformal_exponent(p);
    const double expected = std::exp(-2 * phi) * (-1.0 - laplacian_of_exponent(m, p, 1e-4));
    CHECK(curvature_at(m, p) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("curvature bounds") {
  const auto flat = curvature_bounds(MetricModel::cylinder(2.0),
                                     ChartRect{-1.0, 1.0, 0.0, 2 * std::numbers::pi}, 32);
  CHECK(flat.k1 == doctest::Approx(1.0));
  CHECK(flat.k2 == doctest::Approx(1.0));
  const auto hp = curvature_bounds(MetricModel::half_plane(), ChartRect{0.5, 2.0, -1.0, 1.0}, 32);
  CHECK(hp.k1 == doctest::Approx(1.0));
  CHECK(hp.k2 == doctest::Approx(1.0));

  const auto m = bumped_half_plane(0.1);
  const auto coarse = curvature_bounds(m, 32);
  const auto fine = curvature_bounds(m, 128);
  CHECK(coarse.k2 < 1.0);
  CHECK(coarse.k1 > 1.0);
  CHECK(coarse.margin == 1e-3);

  // direct sampling at four times the resolution over the bump support
  const ChartRect support = perturbation_support(m);
  const int n = 128;
  double kmin = -1.0;
  double kmax = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const ChartPoint p{support.u_min + (support.u_max - support.u_min) * i / (n - 1),
                         support.v_min + (support.v_max - support.v_min) * j / (n - 1)};
      const double k = curvature_at(m, p);
      kmin = std::min(kmin, k);
      kmax = std::max(kmax, k);
    }
  }
  CHECK(coarse.k1 * coarse.k1 >= -kmin);
  CHECK(coarse.k2 * coarse.k2 <= -kmax);
  CHECK(fine.k1 <= coarse.k1 * (1 + coarse.margin));
  CHECK(fine.k2 >= coarse.k2 / (1 + coarse.margin));
}

TEST_CASE("vertical geodesic in the half-plane") {
  const auto m = MetricModel::half_plane();
  const auto end = integrate_geodesic(m, {{1.0, 0.0}, {1.0, 0.0}}, 1.0, 1e-12);
  CHECK(end.base.u == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(std::abs(end.base.v) < 1e-10);
  CHECK(end.velocity[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("horizontal start follows the unit semicircle") {
  const auto m = MetricModel::half_plane();
  const auto end = integrate_geodesic(m, {{1.0, 0.0}, {0.0, 1.0}}, 1.0, 1e-12);
  CHECK(std::hypot(end.base.u, end.base.v) == doctest::Approx(1.0).epsilon(1e-10));
  // distance travelled equals the hyperbolic distance from i along the circle
  CHECK(end.base.u == doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-10));
}

TEST_CASE("core geodesic of the cylinder closes after one core length") {
  const auto m = MetricModel::cylinder(2.0);
  const auto start = unit_phase_point(m, {0.0, 0.0, ChartId::cylinder}, 0.5 * std::numbers::pi);
  const auto end = integrate_geodesic(m, start, 2.0, 1e-12);
  CHECK(std::abs(end.base.u) < 1e-8);
  CHECK(end.base.v == doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));
  CHECK((end.velocity - start.velocity).norm() < 1e-8);
}

TEST_CASE("unit speed is conserved and the flow composes") {
  const auto m = bumped_half_plane(0.1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> T(0.0, 5.0);
  std::uniform_real_distribution<double> A(0.0, 2 * std::numbers::pi);
  const double tol = 1e-11;
  for (int i = 0; i < 6; ++i) {
    const auto xi = unit_phase_point(m, {1.2, 0.1}, A(rng));
    const double s = T(rng);
    const double t = T(rng);
    const auto direct = integrate_geodesic(m, xi, s + t, tol);
    const auto split = integrate_geodesic(m, integrate_geodesic(m, xi, s, tol), t, tol);
    CHECK(std::abs(speed(m, direct) - 1.0) <= 10 * tol);
    CHECK(std::abs(direct.base.u - split.base.u) <= 100 * tol * std::max(1.0, direct.base.u));
    CHECK(std::abs(direct.base.v - split.base.v) <= 100 * tol * std::max(1.0, direct.base.u));
  }
  const auto long_run = integrate_geodesic(m, unit_phase_point(m, {1.0, 0.0}, 0.3), 50.0, tol);
  CHECK(std::abs(speed(m, long_run) - 1.0) <= 10 * tol);
}

TEST_CASE("Jacobi monodromy in constant curvature is the cosh/sinh matrix") {
  const auto m = MetricModel::half_plane();
  const double l = 1.7;
  const auto mono = integrate_jacobi(m, {{1.0, 0.0}, {0.3, 0.95393920141694566}}, l, 1e-12);
  CHECK(mono.matrix(0, 0) == doctest::Approx(std::cosh(l)).epsilon(1e-8));
  CHECK(mono.matrix(0, 1) == doctest::Approx(std::sinh(l)).epsilon(1e-8));
  CHECK(mono.matrix(1, 0) == doctest::Approx(std::sinh(l)).epsilon(1e-8));
  CHECK(mono.matrix(1, 1) == doctest::Approx(std::cosh(l)).epsilon(1e-8));
  CHECK(mono.eigenvalues[0] == doctest::Approx(std::exp(l)).epsilon(1e-8));
  CHECK(mono.eigenvalues[1] == doctest::Approx(std::exp(-l)).epsilon(1e-8));

  const auto zero = integrate_jacobi(m, {{1.0, 0.0}, {1.0, 0.0}}, 0.0);
  CHECK(zero.matrix.isIdentity(1e-15));
}

TEST_CASE("perturbed Jacobi flow agrees with a tighter integration and stays symplectic") {
  const auto m = bumped_half_plane(0.1);
  const auto xi = unit_phase_point(m, {1.3, -0.4}, 2.0);
  const auto loose = integrate_jacobi(m, xi, 1.0, 1e-10);
  const auto tight = integrate_jacobi(m, xi, 1.0, 1e-12);
  CHECK((loose.matrix - tight.matrix).norm() < 1e-8);
  CHECK(std::abs(tight.determinant() - 1.0) < 1e-8);
  CHECK(std::abs(tight.eigenvalues[0] * tight.eigenvalues[1] - 1.0) < 1e-8);
}

TEST_CASE("Sasaki distance") {
  const auto m = MetricModel::cylinder(2.0);
  const ChartPoint p{0.1, 0.2, ChartId::cylinder};
  const auto xi = unit_phase_point(m, p, 0.4);
  CHECK(sasaki_distance(m, xi, xi) == 0.0);
  CHECK(sasaki_distance(m, xi, unit_phase_point(m, p, 0.5)) == doctest::Approx(0.1).epsilon(1e-12));

  // far-apart points are outside the local formula
  const auto far = unit_phase_point(m, {3.0, 0.2, ChartId::cylinder}, 0.4);
  CHECK_THROWS_AS(sasaki_distance(m, xi, far), RangeError);
}

TEST_CASE("Sasaki distance against a discretised minimising path in the unit tangent bundle") {
  // Half-plane frame e1 = u d/du, e2 = u d/dv: a parallel field turns at rate dv / u. For a
  // fixed base path the shortest lift has length sqrt(L^2 + F^2), F the fibre mismatch after
  // transport, so minimising over a family of base paths gives a numerical distance.
  const auto m = MetricModel::half_plane();
  const ChartPoint p{1.0, 0.0};
  const ChartPoint q{1.02, 0.015};
  const auto xi1 = unit_phase_point(m, p, 0.3);
  const auto xi2 = unit_phase_point(m, q, 0.33);
  const double th1 = std::atan2(xi1.velocity[1], xi1.velocity[0]);
  const double th2 = std::atan2(xi2.velocity[1], xi2.velocity[0]);
  const Eigen::Vector2d a = p.coords();
  const Eigen::Vector2d d = q.coords() - a;
  const Eigen::Vector2d normal(-d[1], d[0]);
  auto lifted_length = [&](double bend) {
    const int n = 2000;
    double len = 0.0;
    double turn = 0.0;
    Eigen::Vector2d prev = a;
    for (int i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const Eigen::Vector2d x = a + t * d + bend * std::sin(std::numbers::pi * t) * normal;
      const Eigen::Vector2d step = x - prev;
      const double u_mid = 0.5 * (x[0] + prev[0]);
      len += step.norm() / u_mid;
      turn += step[1] / u_mid;
      prev = x;
    }
    return std::hypot(len, th2 - th1 - turn);
  };
  double best = lifted_length(0.0);
  for (int i = -200; i <= 200; ++i) best = std::min(best, lifted_length(i * 0.005));
  CHECK(sasaki_distance(m, xi1, xi2) == doctest::Approx(best).epsilon(0.05));
}
