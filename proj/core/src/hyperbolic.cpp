#include "lenspec/hyperbolic.hpp"

#include <cmath>

#include "lenspec/errors.hpp"

namespace lenspec::hyperbolic {

double distance(Complex a, Complex b) {
  return 2.0 * std::asinh(std::abs(a - b) / (2.0 * std::sqrt(a.imag() * b.imag())));
}

Direction direction(Complex a, Complex b) {
  const double y = a.imag();
  const Complex t = (b - a.real()) / y;
  const Complex zeta = (t - Complex(0, 1)) / (t + Complex(0, 1));
  const double r = std::abs(zeta);
  if (r == 0.0) return {Complex(0, 0), 0.0};
  const Complex unit = zeta / r;
  return {y * Complex(0, 1) * unit, 2.0 * std::atanh(r)};
}

std::pair<Complex, Complex> exp(Complex a, Complex velocity) {
  const double y = a.imag();
  const double speed = std::abs(velocity);
  if (speed == 0.0) return {a, Complex(0, 0)};
  const double len = speed / y;
  const Complex unit = Complex(0, -1) * velocity / speed;
  const double th = std::tanh(0.5 * len);
  const Complex zeta = th * unit;
  const Complex one(1, 0);
  const Complex w = Complex(0, 1) * (one + zeta) / (one - zeta);
  const double sech = 1.0 / std::cosh(0.5 * len);
  const Complex dzeta = 0.5 * len * sech * sech * unit;
  const Complex dw = Complex(0, 2) / ((one - zeta) * (one - zeta)) * dzeta;
  return {a.real() + y * w, y * dw};
}

Complex mobius(const Eigen::Matrix2d& m, Complex z) {
  return (m(0, 0) * z + m(0, 1)) / (m(1, 0) * z + m(1, 1));
}

Complex mobius_derivative(const Eigen::Matrix2d& m, Complex z) {
  const Complex den = m(1, 0) * z + m(1, 1);
  return (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / (den * den);
}

FixedPoints fixed_points(const Eigen::Matrix2d& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  FixedPoints fp;
  if (c == 0.0) {
    // z -> (a z + b) / d; infinity attracts when |a| > |d|.
    if (a == d) throw NonHyperbolicError("parabolic element has a single fixed point");
    const double finite = b / (d - a);
    if (std::abs(a) > std::abs(d)) {
      fp.repelling = finite;
    } else {
      fp.attracting = finite;
    }
    return fp;
  }
  const double disc = (d - a) * (d - a) + 4.0 * b * c;
  if (disc <= 0.0) throw NonHyperbolicError("element is not hyperbolic");
  const double s = std::sqrt(disc);
  const double z1 = (a - d + s) / (2.0 * c);
  const double z2 = (a - d - s) / (2.0 * c);
  // |m'(z)| = 1 / |c z + d|^2 < 1 at the attracting point
  if (std::abs(c * z1 + d) > std::abs(c * z2 + d)) {
    fp.attracting = z1;
    fp.repelling = z2;
  } else {
    fp.attracting = z2;
    fp.repelling = z1;
  }
  return fp;
}

Geodesic geodesic_through(double x1, double x2) {
  Geodesic g;
  g.center = 0.5 * (x1 + x2);
  g.radius = 0.5 * std::abs(x2 - x1);
  return g;
}

Geodesic axis(const Eigen::Matrix2d& m) {
  const FixedPoints fp = fixed_points(m);
  if (!fp.attracting || !fp.repelling) {
    Geodesic g;
    g.vertical = true;
    g.center = fp.attracting ? *fp.attracting : *fp.repelling;
    return g;
  }
  return geodesic_through(*fp.repelling, *fp.attracting);
}

double distance_to_geodesic(Complex z, const Geodesic& g) {
  if (g.vertical) return std::asinh(std::abs(z.real() - g.center) / z.imag());
  const double r2 = std::norm(z - g.center);
  return std::asinh(std::abs(r2 - g.radius * g.radius) / (2.0 * g.radius * z.imag()));
}

double distance_between_geodesics(double x1, double x2, double x3, double x4) {
  const double cross = (x3 - x2) * (x4 - x1) / ((x2 - x1) * (x4 - x3));
  return std::acosh(1.0 + 2.0 * cross);
}

double translation_length(const Eigen::Matrix2d& m) {
  const double t = std::abs(m.trace());
  if (t <= 2.0) throw NonHyperbolicError("|trace| <= 2: element is not hyperbolic");
  return 2.0 * std::acosh(0.5 * t);
}

}  // namespace lenspec::hyperbolic
