#pragma once

// Shared fixtures: a rank-2 Schottky group with known lengths, exact
// constant-curvature spectra and a synthetic spectrum with prescribed growth.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lenspec/geometry.hpp"
#include "lenspec/spectrum.hpp"

namespace lenspec::testing {

// Hyperbolic generator pairing the circle of radius r about x1 with the one about x2.
Eigen::Matrix2d circle_pairing(double x1, double x2, double r);

// [[2, 1.5], [2, 2]] and [[4, 15], [1, 4]]
std::vector<Eigen::Matrix2d> schottky_generators();
MetricModel schottky_model();

// Every primitive class up to the given word length with its exact length
// and the constant-curvature weight 2 sinh(l / 2), truncated at the horizon.
LengthSpectrum exact_schottky_spectrum(int max_word_length);

// One primitive of length l with weight 2 sinh(l / 2), horizon 4 l.
LengthSpectrum single_primitive_spectrum(double l);

// Primitive lengths placed so that N(T) = round(e^{hT} / (hT)) for T >= 2 / h,
// up to horizon T_max.
LengthSpectrum synthetic_pot_spectrum(double h, double T_max);

// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

}  // namespace lenspec::testing
