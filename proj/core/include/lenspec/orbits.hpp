#pragma once

// Closed-geodesic search in a free-homotopy class: Birkhoff curve shortening
// for global convergence, then multiple-shooting Newton on the periodicity
// conditions. Also the linearised Poincare map and determinant weights.

#include <array>
#include <vector>

#include "lenspec/geometry.hpp"
#include "lenspec/loop.hpp"
#include "lenspec/word.hpp"

namespace lenspec {

struct ClosedGeodesic {
  Word word;
  double length = 0.0;  // primitive length
  Loop loop;            // shooting nodes as a closed polyline
  Monodromy monodromy;
  std::array<double, 2> eigenvalues{1.0, 1.0};
  double residual = 0.0;
  // Unit-speed shooting nodes; node j flows to node j + 1 in time length / nodes.size(),
  // the last one to the deck image of node 0.
  std::vector<PhasePoint> nodes;

  const PhasePoint& start() const { return nodes.at(0); }
};

// Alternating Birkhoff sweeps (odd vertices, then even ones) replacing each
// vertex by the geodesic midpoint of its neighbours. Stops when one sweep
// shortens the loop by less than tol or after max_iters sweeps. `history`, if
// given, receives the length after every sweep.
Loop shorten_loop(const MetricModel& model, const Loop& loop, int max_iters, double tol,
                  std::vector<double>* history = nullptr);

struct NewtonOptions {
  int max_iterations = 50;
  double flow_tol = 1e-12;
  double nodes_per_unit = 2.0;
};

// Throws NonConvergenceError carrying the last residual when the solve fails,
// DegenerateOrbitError when the converged orbit is not hyperbolic.
ClosedGeodesic refine_newton(const MetricModel& model, const Loop& loop, double tol = 1e-10,
                             const NewtonOptions& options = {});

// Jacobi monodromy over k periods, integrated period by period from the first node.
Monodromy poincare_map(const MetricModel& model, const ClosedGeodesic& orbit, int k,
                       double tol = 1e-12);

// sqrt|det(I - P^k)| = |lambda^{k/2} - lambda^{-k/2}| from the expanding eigenvalue of P.
double det_weight(const Monodromy& m, int k);

struct OrbitSearchOptions {
  int vertices_per_unit = 32;
  int max_doublings = 1;
  double doubling_tol = 1e-7;
  int shorten_iters = 200;
  double shorten_tol = 1e-12;
  double newton_tol = 1e-10;
  NewtonOptions newton;

  // Constant-curvature models get the full shortening schedule; perturbed
  // ones, where every midpoint is a shooting solve, a short one that only
  // feeds Newton.
  static OrbitSearchOptions for_model(const MetricModel& model);
};

ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Word& w);
ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Word& w,
                                    const OrbitSearchOptions& options);
ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Loop& seed,
                                    const OrbitSearchOptions& options);

}  // namespace lenspec
