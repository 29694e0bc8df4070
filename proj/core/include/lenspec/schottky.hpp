#pragma once

// Schottky groups in PSL(2, R): generator validation, conjugacy-class
// enumeration over the free group and exact closed-geodesic lengths.

#include <vector>

#include <Eigen/Dense>

#include "lenspec/geometry.hpp"
#include "lenspec/loop.hpp"
#include "lenspec/word.hpp"

namespace lenspec {

// Isometric circle {z : |c z + d| = 1} of the generator or inverse `letter`.
struct IsometricCircle {
  double center = 0.0;
  double radius = 0.0;
  Word::Letter letter = 0;
};

constexpr double kSchottkyMargin = 1e-6;

// Throws ConfigError("Schottky validation failed: ...") unless every generator
// has unit determinant, is hyperbolic and all isometric circles are pairwise
// disjoint with margin kSchottkyMargin.
void validate_schottky(const std::vector<Eigen::Matrix2d>& generators);

std::vector<IsometricCircle> isometric_circles(const std::vector<Eigen::Matrix2d>& generators);

Eigen::Matrix2d letter_matrix(const std::vector<Eigen::Matrix2d>& generators, Word::Letter x);
// rho(w) = rho(w1) rho(w2) ... rho(wn)
Eigen::Matrix2d word_matrix(const Word& w, const std::vector<Eigen::Matrix2d>& generators);

// Minimum distance between distinct isometric-circle geodesics. Every
// cyclically reduced word of length m has length at least m times this value.
double circle_separation(const std::vector<Eigen::Matrix2d>& generators);

double exact_length(const Word& w, const std::vector<Eigen::Matrix2d>& generators);

// One representative per primitive conjugacy class of length <= max_word_length,
// sorted by (length, lexicographic letter order a < A < b < B < ...).
std::vector<Word> enumerate_classes(int rank, int max_word_length, bool unoriented);
std::vector<Word> enumerate_classes(const std::vector<Eigen::Matrix2d>& generators,
                                    int max_word_length, bool unoriented);

// Length below which every closed geodesic of the model has a word of length
// <= max_word_length.
double completeness_horizon(const MetricModel& model, int max_word_length);

// Polyline along the axis of rho(w) (the core circle for cylinders). vertices = 0
// selects 32 vertices per unit length, with a minimum of 8.
Loop seed_loop(const Word& w, const std::vector<Eigen::Matrix2d>& generators,
               const MetricModel& model, int vertices = 0);
Loop seed_loop(const Word& w, const MetricModel& model, int vertices = 0);

}  // namespace lenspec
