#pragma once

// Closed-form geometry of the upper half-plane {z : Im z > 0} with metric
// |dz|^2 / (Im z)^2. Every constant-curvature chart in the library maps
// isometrically onto this model.

#include <complex>
#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace lenspec::hyperbolic {

using Complex = std::complex<double>;

double distance(Complex a, Complex b);

// Unit tangent (Euclidean length Im a) at a pointing toward b, and d(a, b).
struct Direction {
  Complex tangent;
  double distance;
};
Direction direction(Complex a, Complex b);

// Point reached from a in unit time along the geodesic with initial velocity
// `velocity`, together with the velocity there.
std::pair<Complex, Complex> exp(Complex a, Complex velocity);

Complex mobius(const Eigen::Matrix2d& m, Complex z);
Complex mobius_derivative(const Eigen::Matrix2d& m, Complex z);

// Fixed points on the boundary; nullopt marks the point at infinity.
struct FixedPoints {
  std::optional<double> attracting;
  std::optional<double> repelling;
};
FixedPoints fixed_points(const Eigen::Matrix2d& m);

// Euclidean description of a geodesic: a semicircle centred on the real axis
// or a vertical line.
struct Geodesic {
  bool vertical = false;
  double center = 0.0;  // real centre, or abscissa of the vertical line
  double radius = 0.0;
};
Geodesic axis(const Eigen::Matrix2d& m);
Geodesic geodesic_through(double x1, double x2);

double distance_to_geodesic(Complex z, const Geodesic& g);

// Distance between two disjoint geodesics given by their boundary endpoints,
// (x1, x2) and (x3, x4) with x1 < x2 < x3 < x4.
double distance_between_geodesics(double x1, double x2, double x3, double x4);

// Translation length 2 acosh(|tr m| / 2) of a hyperbolic element.
double translation_length(const Eigen::Matrix2d& m);

}  // namespace lenspec::hyperbolic
