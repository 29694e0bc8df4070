#pragma once

// Periodic-orbit analysis of a length spectrum: dynamical zeta functions,
// entropy and pressure fits, trace pairings with test functions, orbit
// separation and prime-orbit ratios.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lenspec/geometry.hpp"
#include "lenspec/orbits.hpp"
#include "lenspec/spectrum.hpp"

namespace lenspec {

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

struct ZetaValue {
  std::complex<double> s;
  std::complex<double> value;
  std::complex<double> log_value;
  double truncation_T = 0.0;
  int k_max = 1;
  // Bound on |Z - Z_T| from a fitted orbit-growth constant; infinite unless
  // Re(s) exceeds the abscissa by kZetaGap. Heuristic, not rigorous.
  double tail_bound = 0.0;
  bool convergent = true;
  double abscissa = 0.0;  // NaN when it could not be estimated
};

constexpr double kZetaGap = 0.1;

// exp of sum over primitives l_p <= T and 1 <= k <= k_max of e^{-k s l_p} / k
ZetaValue zeta(const LengthSpectrum& spec, std::complex<double> s, int k_max);
// Same with each term divided by the weight sqrt|det(I - P^k)|.
ZetaValue weighted_zeta(const LengthSpectrum& spec, std::complex<double> s, int k_max);

struct EntropyEstimate {
  double h = 0.0;
  Window window;
  double stderr_h = 0.0;
  CountingConvention convention;
  int steps = 0;         // jumps of N(T) inside the window
  bool vacuous = false;  // at most one primitive orbit
};

// Least-squares slope of log(T N(T)) on a 256-point grid. The default window
// is the upper half of the horizon.
EntropyEstimate estimate_entropy(const LengthSpectrum& spec,
                                 std::optional<Window> window = std::nullopt);

enum class PotentialKind { zero, constant, srb_half };

struct Potential {
  PotentialKind kind = PotentialKind::zero;
  double c = 0.0;

  static Potential zero() { return {}; }
  static Potential constant(double c) { return {PotentialKind::constant, c}; }
  static Potential srb_half() { return {PotentialKind::srb_half, 0.0}; }
  std::string str() const;
  // integral of the potential over one traversal of an orbit of the given
  // primitive length and primitive weight, k times
  double orbit_integral(double primitive_length, double primitive_weight, int k) const;
};

struct PressureEstimate {
  double p = 0.0;
  Potential potential;
  Window window;
  double stderr_p = 0.0;
  double bin_width = 0.5;
  int bins = 0;
  double entropy = 0.0;  // entropy used in the finite-T correction
};

// Slope of log sum_{l in bin} exp(int f) against the bin position, with bins
// (T - width, T] over the window; empty bins are merged into the next one.
PressureEstimate estimate_pressure(const LengthSpectrum& spec, const Potential& potential,
                                   std::optional<Window> window = std::nullopt,
                                   double bin_width = 0.5);

// Smooth bump e * exp(1 / (x^2 - 1)), x = 2 (t - center) / width, peak 1 at the centre.
class TestFunction {
 public:
  TestFunction(double center, double width);
  static TestFunction on_support(double a, double b) { return {0.5 * (a + b), b - a}; }

  double operator()(double t) const;
  double support_lo() const { return center_ - 0.5 * width_; }
  double support_hi() const { return center_ + 0.5 * width_; }
  double center() const { return center_; }
  double width() const { return width_; }

 private:
  double center_;
  double width_;
};

// sum over entries of l_p phi(k l_p) / sqrt|det(I - P^k)|; iterates are
// generated from the primitives when not stored.
double dynamical_trace(const LengthSpectrum& spec, const TestFunction& phi);
double dynamical_trace(const LengthSpectrum& spec, const std::function<double(double)>& phi,
                       double support_lo, double support_hi);

struct SeparationPair {
  Word first;
  Word second;
  double min_distance = 0.0;
  bool pass = true;
};

struct SeparationReport {
  bool pass = true;
  bool vacuous = false;
  double threshold = 0.0;  // 2 e^{-B T}
  double min_distance = 0.0;
  double margin = 0.0;         // min_distance - threshold
  double overlap_ratio = 0.0;  // threshold / min_distance, shrinks as B grows
  int orbit_count = 0;
  std::vector<SeparationPair> pairs;
};

// Orbits with length in [T - delta, T] are sampled at `samples` points each;
// every pair's minimum Sasaki distance (over neighbouring deck lifts) must
// exceed 2 e^{-B T}.
SeparationReport separation_check(const std::vector<ClosedGeodesic>& orbits,
                                  const MetricModel& model, double T, double delta, double B,
                                  int samples);

struct PotRow {
  double T = 0.0;
  long count = 0;
  double ratio = 0.0;  // h T N(T) / e^{h T}
};

struct PotTable {
  double h = 0.0;
  bool vacuous = false;
  CountingConvention convention;
  std::vector<PotRow> rows;
};

PotTable pot_ratio(const LengthSpectrum& spec, double h, const std::vector<double>& T_values);

enum class CorollaryOutcome { point_spectrum, empty_point_spectrum, inconclusive };

struct CorollaryReport {
  CorollaryOutcome outcome = CorollaryOutcome::inconclusive;
  double s0_lower_bound = 0.0;  // point_spectrum only
  double upper_threshold = 0.0;  // n k1 / 2
  double lower_threshold = 0.0;  // n k2 / 2
  std::string message;
};

CorollaryReport corollary_arithmetic(double h, double k1, double k2, int n);

}  // namespace lenspec
