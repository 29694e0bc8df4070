#include "lenspec/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "lenspec/errors.hpp"
#include "lenspec/hyperbolic.hpp"

namespace lenspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// How many times an entry is counted under the orientation convention.
int orientation_multiplicity(const SpectrumEntry& e, Orientation orientation) {
  if (orientation == Orientation::oriented) return e.oriented ? 1 : 2;
  if (e.oriented && e.word.canonical(true) != e.word.canonical(false)) return 0;
  return 1;
}

double effective_horizon(const LengthSpectrum& spec) {
  if (std::isfinite(spec.max_length())) return spec.max_length();
  double top = 0.0;
  for (const auto& e : spec.entries()) top = std::max(top, e.total_length);
  return top;
}

std::size_t primitive_count(const LengthSpectrum& spec) {
  std::size_t n = 0;
  for (const auto& e : spec.entries()) {
    if (e.k == 1 && orientation_multiplicity(e, spec.convention().orientation) > 0) ++n;
  }
  return n;
}

double require_weight(const SpectrumEntry& e) {
  if (!e.has_weight()) {
    throw DataError("spectrum entry " + e.word.str() + " (k=" + std::to_string(e.k) +
                    ") has no determinant weight");
  }
  return e.weight;
}

// Weight of the k-th iterate: the stored row when present, else derived.
double weight_of_iterate(const LengthSpectrum& spec, const SpectrumEntry& primitive, int k) {
  if (k == 1) return require_weight(primitive);
  if (const SpectrumEntry* row = spec.find(primitive.word, k); row && row->has_weight()) {
    return row->weight;
  }
  return iterate_weight(require_weight(primitive), k);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.stderr_slope = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return fit;
}

std::string short_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

// Per-orbit magnitude of the k = 1 zeta term at s = 0.
double zeta_magnitude(const SpectrumEntry& e, bool weighted) {
  return weighted ? 1.0 / require_weight(e) : 1.0;
}

ZetaValue zeta_impl(const LengthSpectrum& spec, std::complex<double> s, int k_max, bool weighted) {
  if (k_max < 1) throw DomainError("zeta: k_max must be at least 1");
  const Orientation orientation = spec.convention().orientation;
  ZetaValue out;
  out.s = s;
  out.k_max = k_max;
  out.truncation_T = effective_horizon(spec);

  std::complex<double> log_sum = 0.0;
  for (const auto& e : spec.entries()) {
    if (e.k != 1 || e.primitive_length > out.truncation_T) continue;
    const int mult = orientation_multiplicity(e, orientation);
    if (mult == 0) continue;
    for (int k = 1; k <= k_max; ++k) {
      std::complex<double> term = std::exp(-static_cast<double>(k) * s * e.primitive_length) /
                                  static_cast<double>(k);
      if (weighted) term /= weight_of_iterate(spec, e, k);
      log_sum += static_cast<double>(mult) * term;
    }
  }
  out.log_value = log_sum;
  out.value = std::exp(log_sum);

  // abscissa of convergence
  const std::size_t primitives = primitive_count(spec);
  if (primitives == 0) {
    out.abscissa = 0.0;
  } else if (primitives == 1) {
    const auto prims = spec.primitives();
    const auto it = std::find_if(prims.begin(), prims.end(), [&](const SpectrumEntry& e) {
      return orientation_multiplicity(e, orientation) > 0;
    });
    out.abscissa = weighted ? -std::asinh(require_weight(*it) / 2.0) / it->primitive_length : 0.0;
  } else {
    try {
      out.abscissa = weighted ? estimate_pressure(spec, Potential::srb_half()).p
                              : estimate_entropy(spec).h;
    } catch (const DegenerateEstimateError&) {
      out.abscissa = kNaN;
    } catch (const BinningError&) {
      out.abscissa = kNaN;
    }
  }

  const double sigma = s.real();
  out.convergent = sigma > out.abscissa;
  out.tail_bound = kInf;
  const double T = out.truncation_T;
  if (primitives == 0) {
    out.tail_bound = 0.0;
  } else if (std::isfinite(out.abscissa) && sigma > out.abscissa + kZetaGap && sigma > 0.0 &&
             T > 0.0) {
    // C from unit bins in [T/2, T]: orbits in (t, t + 1] <= C e^{a (t + 1)}
    const double a = out.abscissa;
    double C = 0.0;
    for (double t = 0.5 * T; t + 1.0 <= T + 1e-12; t += 1.0) {
      double bin = 0.0;
      for (const auto& e : spec.entries()) {
        if (e.k != 1 || e.primitive_length <= t || e.primitive_length > t + 1.0) continue;
        bin += orientation_multiplicity(e, orientation) * zeta_magnitude(e, weighted);
      }
      C = std::max(C, bin * std::exp(-a * (t + 1.0)));
    }
    // each orbit beyond T contributes at most m e^{-sigma l} / (1 - e^{-sigma T})
    const double per_bin = C * std::exp(a) * std::exp((a - sigma) * T) /
                           ((1.0 - std::exp(a - sigma)) * (1.0 - std::exp(-sigma * T)));
    out.tail_bound = std::abs(out.value) * std::expm1(per_bin);
  }
  return out;
}

}  // namespace

ZetaValue zeta(const LengthSpectrum& spec, std::complex<double> s, int k_max) {
  return zeta_impl(spec, s, k_max, false);
}

ZetaValue weighted_zeta(const LengthSpectrum& spec, std::complex<double> s, int k_max) {
  return zeta_impl(spec, s, k_max, true);
}

EntropyEstimate estimate_entropy(const LengthSpectrum& spec, std::optional<Window> window) {
  EntropyEstimate est;
  est.convention = spec.convention();
  const std::size_t primitives = primitive_count(spec);
  if (primitives == 0) throw DegenerateEstimateError("entropy estimate needs at least one orbit");
  const double horizon = effective_horizon(spec);
  const Window w = window.value_or(Window{0.5 * horizon, horizon});
  if (!(w.lo < w.hi) || w.lo < 0.0) throw DomainError("entropy window must satisfy 0 <= lo < hi");
  if (w.hi > spec.max_length()) {
    throw IncompleteHorizonError("entropy window ends at " + format_real(w.hi) +
                                 " beyond the completeness horizon " +
                                 format_real(spec.max_length()));
  }
  est.window = w;
  if (primitives == 1) {
    // a single primitive class grows polynomially
    est.vacuous = true;
    return est;
  }
  est.steps = static_cast<int>(spec.count(w.hi) - spec.count(w.lo));
  if (est.steps < 20) {
    throw DegenerateEstimateError("entropy window [" + format_real(w.lo) + ", " +
                                  format_real(w.hi) + "] contains " + std::to_string(est.steps) +
                                  " counting steps; at least 20 are needed");
  }
  constexpr int kGrid = 256;
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < kGrid; ++i) {
    const double t = w.lo + (w.hi - w.lo) * i / (kGrid - 1);
    const long n = spec.count(t);
    if (n <= 0 || t <= 0.0) continue;
    x.push_back(t);
    y.push_back(std::log(t * static_cast<double>(n)));
  }
  if (x.size() < 3) throw DegenerateEstimateError("entropy window holds too few nonzero counts");
  const LineFit fit = fit_line(x, y);
  est.h = std::max(fit.slope, 0.0);
  est.stderr_h = fit.stderr_slope;
  return est;
}

std::string Potential::str() const {
  switch (kind) {
    case PotentialKind::zero:
      return "zero";
    case PotentialKind::constant:
      return "constant(" + short_real(c) + ")";
    case PotentialKind::srb_half:
      return "srb_half";
  }
  return "zero";
}

double Potential::orbit_integral(double primitive_length, double primitive_weight, int k) const {
  switch (kind) {
    case PotentialKind::zero:
      return 0.0;
    case PotentialKind::constant:
      return c * k * primitive_length;
    case PotentialKind::srb_half:
      // weight 2 sinh(L/2) with L the log of the expanding eigenvalue
      return -0.5 * k * 2.0 * std::asinh(0.5 * primitive_weight);
  }
  return 0.0;
}

PressureEstimate estimate_pressure(const LengthSpectrum& spec, const Potential& potential,
                                   std::optional<Window> window, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("pressure bin width must be positive");
  const double horizon = effective_horizon(spec);
  const Window w = window.value_or(Window{0.5 * horizon, horizon});
  if (!(w.lo < w.hi) || w.lo < 0.0) throw DomainError("pressure window must satisfy 0 <= lo < hi");
  if (w.hi > spec.max_length()) {
    throw IncompleteHorizonError("pressure window ends at " + format_real(w.hi) +
                                 " beyond the completeness horizon " +
                                 format_real(spec.max_length()));
  }
  PressureEstimate est;
  est.potential = potential;
  est.window = w;
  est.bin_width = bin_width;

  const int nbins = static_cast<int>(std::floor((w.hi - w.lo) / bin_width + 1e-9));
  const double suggested = std::max(2.0 * bin_width, (w.hi - w.lo) / 4.0);
  if (nbins < 3) {
    throw BinningError("pressure window holds fewer than 3 bins of width " +
                           format_real(bin_width),
                       suggested);
  }
  const CountingConvention conv = spec.convention();
  // bins (hi - (j + 1) eps, hi - j eps], listed from low to high
  std::vector<double> sums(nbins, 0.0);
  std::vector<long> counts(nbins, 0);
  const double lo = w.hi - nbins * bin_width;
  for (const auto& e : spec.entries()) {
    if (e.k != 1) continue;
    const int mult = orientation_multiplicity(e, conv.orientation);
    if (mult == 0) continue;
    const double w1 = potential.kind == PotentialKind::srb_half ? require_weight(e) : kNaN;
    const int k_top = conv.multiplicity == Multiplicity::with_iterates
                          ? static_cast<int>(std::floor(w.hi / e.primitive_length))
                          : 1;
    for (int k = 1; k <= k_top; ++k) {
      const double len = k * e.primitive_length;
      if (len <= lo || len > w.hi) continue;
      const int j = std::min(nbins - 1, static_cast<int>(std::ceil((len - lo) / bin_width)) - 1);
      sums[j] += mult * std::exp(potential.orbit_integral(e.primitive_length, w1, k));
      counts[j] += mult;
    }
  }

  // merge each empty bin into the next higher one; a trailing empty run joins the last full bin
  struct Bin {
    double a, b, sum;
  };
  std::vector<Bin> bins;
  double start = lo;
  for (int j = 0; j < nbins; ++j) {
    const double end = lo + (j + 1) * bin_width;
    if (counts[j] == 0) continue;
    bins.push_back({start, end, sums[j]});
    start = end;
  }
  if (!bins.empty()) bins.back().b = w.hi;
  if (bins.size() < 3) {
    throw BinningError("pressure window has fewer than 3 nonempty bins of width " +
                           format_real(bin_width),
                       suggested);
  }

  // Orbit density e^{pT}/T (1 - 1/(hT)) from the prime orbit asymptotics.
  double h = 0.0;
  try {
    h = estimate_entropy(spec, w).h;
  } catch (const DegenerateEstimateError&) {
    h = 0.0;
  }
  const bool corrected = h * bins.front().b > 1.5;
  est.entropy = corrected ? h : 0.0;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& bin : bins) {
    const double t = 0.5 * (bin.a + bin.b);
    double v = std::log(t * bin.sum / (bin.b - bin.a));
    if (corrected) v -= std::log1p(-1.0 / (h * t));
    x.push_back(t);
    y.push_back(v);
  }
  const LineFit fit = fit_line(x, y);
  est.p = fit.slope;
  est.stderr_p = fit.stderr_slope;
  est.bins = static_cast<int>(bins.size());
  return est;
}

TestFunction::TestFunction(double center, double width) : center_(center), width_(width) {
  if (!(width > 0.0)) throw DomainError("test function width must be positive");
  if (!(center - 0.5 * width > 0.0)) {
    throw DomainError("test function support must lie in (0, inf)");
  }
}

double TestFunction::operator()(double t) const {
  const double x = 2.0 * (t - center_) / width_;
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 + 1.0 / (x * x - 1.0));
}

double dynamical_trace(const LengthSpectrum& spec, const TestFunction& phi) {
  return dynamical_trace(
      spec, [&phi](double t) { return phi(t); }, phi.support_lo(), phi.support_hi());
}

double dynamical_trace(const LengthSpectrum& spec, const std::function<double(double)>& phi,
                       double support_lo, double support_hi) {
  if (!(support_lo > 0.0) || !(support_lo < support_hi)) {
    throw DomainError("test function support must satisfy 0 < a < b");
  }
  if (support_hi > spec.max_length()) {
    throw IncompleteHorizonError("test function support reaches " + format_real(support_hi) +
                                 " beyond the completeness horizon " +
                                 format_real(spec.max_length()));
  }
  const Orientation orientation = spec.convention().orientation;
  double sum = 0.0;
  for (const auto& e : spec.entries()) {
    if (e.k != 1) continue;
    const int mult = orientation_multiplicity(e, orientation);
    if (mult == 0) continue;
    for (int k = 1; k * e.primitive_length < support_hi; ++k) {
      const double t = k * e.primitive_length;
      if (t <= support_lo) continue;
      const double value = phi(t);
      if (value == 0.0) continue;
      sum += mult * e.primitive_length * value / weight_of_iterate(spec, e, k);
    }
  }
  return sum;
}

SeparationReport separation_check(const std::vector<ClosedGeodesic>& orbits,
                                  const MetricModel& model, double T, double delta, double B,
                                  int samples) {
  if (!(delta > 0.0) || !(B > 0.0)) throw DomainError("separation check needs delta, B > 0");
  if (samples < 2) throw DomainError("separation check needs at least 2 samples per orbit");
  SeparationReport report;
  report.threshold = 2.0 * std::exp(-B * T);
  report.min_distance = kInf;

  std::vector<const ClosedGeodesic*> window;
  for (const auto& o : orbits) {
    if (o.nodes.empty()) throw DataError("orbit " + o.word.str() + " carries no shooting nodes");
    if (o.length >= T - delta && o.length <= T) window.push_back(&o);
  }
  report.orbit_count = static_cast<int>(window.size());
  if (window.size() < 2) {
    report.vacuous = true;
    report.margin = kInf;
    return report;
  }

  // base points in the chart of the reduced domain, plus deck neighbours for the second orbit
  std::vector<std::vector<PhasePoint>> reduced(window.size());
  std::vector<std::vector<PhasePoint>> lifted(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto pts = sample_geodesic(model, window[i]->start(), window[i]->length, samples,
                                     kDefaultFlowTolerance);
    for (const auto& p : pts) {
      reduced[i].push_back(model.locate(p).first);
      for (const auto& q : model.neighbouring_lifts(p)) lifted[i].push_back(q);
    }
  }
  // the base distance in a conformal metric is at least e^{-max|phi|} times the hyperbolic one
  const double lower_factor =
      model.kind() == ModelKind::perturbed ? std::exp(-std::abs(model.bump().amplitude)) : 1.0;

  for (std::size_t i = 0; i < window.size(); ++i) {
    for (std::size_t j = i + 1; j < window.size(); ++j) {
      double best = kInf;
      for (const auto& p : reduced[i]) {
        const auto zp = model.to_hyperbolic(p.base);
        for (const auto& q : lifted[j]) {
          const double lb = lower_factor * hyperbolic::distance(zp, model.to_hyperbolic(q.base));
          if (lb >= best) continue;
          // pairs past the injectivity radius keep their lower bound, far above any threshold
          try {
            best = std::min(best, sasaki_distance(model, p, q));
          } catch (const RangeError&) {
            best = std::min(best, lb);
          }
          if (best == 0.0) break;
        }
        if (best == 0.0) break;
      }
      SeparationPair pair{window[i]->word, window[j]->word, best, best > report.threshold};
      report.pass = report.pass && pair.pass;
      report.min_distance = std::min(report.min_distance, best);
      report.pairs.push_back(pair);
    }
  }
  report.margin = report.min_distance - report.threshold;
  report.overlap_ratio = report.min_distance > 0.0 ? report.threshold / report.min_distance : kInf;
  return report;
}

PotTable pot_ratio(const LengthSpectrum& spec, double h, const std::vector<double>& T_values) {
  PotTable table;
  table.h = h;
  table.convention = spec.convention();
  table.vacuous = !(h > 0.0) || primitive_count(spec) <= 1;
  for (double T : T_values) {
    PotRow row;
    row.T = T;
    row.count = spec.count(T);
    row.ratio = table.vacuous ? kNaN : h * T * static_cast<double>(row.count) / std::exp(h * T);
    table.rows.push_back(row);
  }
  return table;
}

CorollaryReport corollary_arithmetic(double h, double k1, double k2, int n) {
  if (!(k2 <= 1.0 && 1.0 <= k1) || !(k2 > 0.0)) {
    throw DomainError("curvature bounds must satisfy 0 < k2 <= 1 <= k1");
  }
  if (!(h >= 0.0)) throw DomainError("entropy must be nonnegative");
  if (n < 1) throw DomainError("dimension n must be at least 1");
  CorollaryReport report;
  report.upper_threshold = n * k1 / 2.0;
  report.lower_threshold = n * k2 / 2.0;
  if (h > report.upper_threshold) {
    report.outcome = CorollaryOutcome::point_spectrum;
    report.s0_lower_bound = h + n * (1.0 - k1) / 2.0;
    report.message = "implies point spectrum, s₀ ≥ " + short_real(report.s0_lower_bound);
  } else if (h <= report.lower_threshold) {
    report.outcome = CorollaryOutcome::empty_point_spectrum;
    report.message = "implies empty point spectrum";
  } else {
    report.outcome = CorollaryOutcome::inconclusive;
    report.message = "inconclusive";
  }
  return report;
}

}  // namespace lenspec
