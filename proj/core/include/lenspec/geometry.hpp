#pragma once

// Negatively curved surface models in a universal-cover chart, geodesic flow
// and Jacobi-field integration, curvature bounds and the first-order Sasaki
// distance on the unit tangent bundle.

#include <array>
#include <complex>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lenspec/word.hpp"

namespace lenspec {

// HalfPlane chart: (u, v) with u > 0 and metric (du^2 + dv^2) / u^2.
// Cylinder chart: (r, theta) on all of R^2 (theta unwrapped) with metric
// dr^2 + (l / 2 pi)^2 cosh^2(r) dtheta^2.
enum class ChartId { half_plane, cylinder };

struct ChartPoint {
  double u = 0.0;
  double v = 0.0;
  ChartId chart = ChartId::half_plane;

  Eigen::Vector2d coords() const { return {u, v}; }
  static ChartPoint from(const Eigen::Vector2d& x, ChartId chart) { return {x[0], x[1], chart}; }
};

struct PhasePoint {
  ChartPoint base;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

enum class ModelKind { half_plane, cylinder, schottky, perturbed };

// Conformal perturbation g = exp(2 phi) g0 with
// phi = amplitude * e * exp(1 / ((d / radius)^2 - 1)) for d < radius,
// d the base-metric distance to the centre. phi peaks at `amplitude`.
struct Bump {
  ChartPoint center;
  double radius = 1.0;
  double amplitude = 0.0;
};

struct ChartRect {
  double u_min = 0.0;
  double u_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;

  bool contains(const ChartRect& other) const {
    return u_min <= other.u_min && other.u_max <= u_max && v_min <= other.v_min &&
           other.v_max <= v_max;
  }
};

// Metric, Christoffel symbols christoffel[k](i, j) = Gamma^k_ij and Gaussian
// curvature at one point.
struct LocalGeometry {
  Eigen::Matrix2d metric;
  std::array<Eigen::Matrix2d, 2> christoffel;
  double curvature = -1.0;
};

class MetricModel {
 public:
  static MetricModel half_plane();
  static MetricModel cylinder(double core_length);
  // Generators act on z = v + i u. Validated as a Schottky system.
  static MetricModel schottky(std::vector<Eigen::Matrix2d> generators);
  static MetricModel perturbed(const MetricModel& base, ChartPoint center, double radius,
                               double amplitude);

  ModelKind kind() const;
  ChartId chart() const;
  int boundary_dimension() const { return 1; }
  // Number of free generators of the deck group (0, 1 or the Schottky rank).
  int rank() const;
  bool is_constant_curvature() const;
  double injectivity_radius_lower_bound() const;

  // Underlying constant-curvature model (the model itself when unperturbed).
  const MetricModel& unperturbed() const;
  const Bump& bump() const;  // perturbed models only
  double core_length() const;  // cylinder-based models only
  // Schottky generators; for cylinder-based models the equivalent diagonal generator.
  const std::vector<Eigen::Matrix2d>& generators() const;

  bool in_domain(const ChartPoint& p) const;
  LocalGeometry local(const ChartPoint& p) const;
  // Conformal exponent phi at p (zero for unperturbed models).
  double conformal_exponent(const ChartPoint& p) const;

  // Action of the deck transformation rho(w) on the cover chart. For
  // w = w1 w2 ... wn, rho(w) = rho(w1) rho(w2) ... rho(wn).
  ChartPoint deck(const Word& w, const ChartPoint& p) const;
  PhasePoint deck(const Word& w, const PhasePoint& xi) const;

  // Moves a phase point into the canonical fundamental domain. Returns the
  // reduced point and the word g with reduced = deck(g, xi).
  std::pair<PhasePoint, Word> locate(const PhasePoint& xi) const;
  // The reduced point together with its images under every generator and
  // inverse; candidate lifts for quotient distances.
  std::vector<PhasePoint> neighbouring_lifts(const PhasePoint& xi) const;

  // Coordinate map onto the hyperbolic half-plane, z = v_H + i u_H. An
  // isometry for the unperturbed metric.
  std::complex<double> to_hyperbolic(const ChartPoint& p) const;
  ChartPoint from_hyperbolic(std::complex<double> z) const;
  // d(u_H, v_H) / d(chart coordinates)
  Eigen::Matrix2d hyperbolic_jacobian(const ChartPoint& p) const;

  struct Data;

 private:
  explicit MetricModel(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

Eigen::Matrix2d metric_at(const MetricModel& model, const ChartPoint& p);
double curvature_at(const MetricModel& model, const ChartPoint& p);

// Columns are a g-orthonormal, positively oriented frame (e1 along the first
// coordinate direction).
Eigen::Matrix2d orthonormal_frame(const Eigen::Matrix2d& metric);
double speed(const MetricModel& model, const PhasePoint& xi);
// Angle of the velocity in the orthonormal frame at its base point.
double frame_angle(const MetricModel& model, const PhasePoint& xi);
PhasePoint unit_phase_point(const MetricModel& model, const ChartPoint& p, double angle);

struct CurvatureBounds {
  double k1 = 1.0;
  double k2 = 1.0;
  int sample_count = 0;
  double margin = 0.0;
  double k_min = -1.0;  // extreme sampled curvatures after local refinement
  double k_max = -1.0;
};

// Bounding chart rectangle of the perturbation support (perturbed models only).
ChartRect perturbation_support(const MetricModel& model);

CurvatureBounds curvature_bounds(const MetricModel& model, const ChartRect& region, int grid,
                                 double margin = 1e-3);
// Region defaults to the perturbation support padded by 10 percent.
CurvatureBounds curvature_bounds(const MetricModel& model, int grid = 64, double margin = 1e-3);

// Transverse linearised flow on (J, J') for J'' + K J = 0 along a unit-speed
// geodesic. The matrix is stored with its unit-time factors so that the
// determinant is evaluated without cancellation.
struct Monodromy {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  std::vector<Eigen::Matrix2d> factors;
  // |expanding| >= |contracting|; NaN when the matrix is elliptic.
  std::array<double, 2> eigenvalues{1.0, 1.0};
  double base_length = 0.0;

  double determinant() const;
  double trace() const { return matrix.trace(); }
  Monodromy power(int k) const;
  // Recomputes eigenvalues from the matrix and the factored determinant.
  void update_eigenvalues();
};

constexpr double kDefaultFlowTolerance = 1e-10;

PhasePoint integrate_geodesic(const MetricModel& model, const PhasePoint& xi, double t,
                              double tol = kDefaultFlowTolerance, bool renormalize = false);

Monodromy integrate_jacobi(const MetricModel& model, const PhasePoint& xi, double t,
                           double tol = kDefaultFlowTolerance);

struct JacobiFlow {
  PhasePoint end;
  Monodromy monodromy;
};
JacobiFlow integrate_jacobi_flow(const MetricModel& model, const PhasePoint& xi, double t,
                                 double tol = kDefaultFlowTolerance);

// count equally spaced phase points G^{j t / count}(xi), j = 0 .. count - 1.
std::vector<PhasePoint> sample_geodesic(const MetricModel& model, const PhasePoint& xi, double t,
                                        int count, double tol = kDefaultFlowTolerance);

// Geodesic from p to q parametrised on [0, 1] (speed equals length).
struct Segment {
  Eigen::Vector2d initial_velocity = Eigen::Vector2d::Zero();
  Eigen::Vector2d terminal_velocity = Eigen::Vector2d::Zero();
  double length = 0.0;
};

// Closed form on constant-curvature models, shooting on perturbed ones.
Segment connect(const MetricModel& model, const ChartPoint& p, const ChartPoint& q,
                double tol = 1e-12);
// End point and velocity after unit time along the geodesic with initial velocity w.
PhasePoint exp_map(const MetricModel& model, const ChartPoint& p, const Eigen::Vector2d& w,
                   double tol = 1e-12);
ChartPoint geodesic_midpoint(const MetricModel& model, const ChartPoint& p, const ChartPoint& q,
                             double tol = 1e-12);
double geodesic_distance(const MetricModel& model, const ChartPoint& p, const ChartPoint& q,
                         double tol = 1e-12);

// sqrt(d_base^2 + d_fiber^2); valid for separations well inside the
// injectivity radius. Throws RangeError beyond it.
double sasaki_distance(const MetricModel& model, const PhasePoint& xi1, const PhasePoint& xi2);

}  // namespace lenspec
