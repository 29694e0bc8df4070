#include "lenspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <boost/numeric/odeint/stepper/bulirsch_stoer.hpp>

#include "lenspec/detail/jet.hpp"
#include "lenspec/errors.hpp"
#include "lenspec/hyperbolic.hpp"
#include "lenspec/schottky.hpp"

namespace lenspec {

using Complex = std::complex<double>;
using detail::Jet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLocalErrorFraction = 0.05;

}  // namespace

struct MetricModel::Data {
  ModelKind kind = ModelKind::half_plane;
  ChartId chart = ChartId::half_plane;
  double core_length = 0.0;
  std::vector<Eigen::Matrix2d> generators;
  std::vector<Eigen::Matrix2d> letters;  // indexed by letter code
  std::vector<IsometricCircle> circles;
  double inj = kInf;

  std::optional<MetricModel> base;
  Bump bump;
  double peak_scale = 0.0;  // amplitude * e
};

namespace {

std::vector<Eigen::Matrix2d> letter_table(const std::vector<Eigen::Matrix2d>& gens) {
  std::vector<Eigen::Matrix2d> out;
  for (const auto& g : gens) {
    out.push_back(g);
    Eigen::Matrix2d inv;
    inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    out.push_back(inv);
  }
  return out;
}

Word letter_power(Word::Letter x, long n) {
  if (n < 0) {
    x = inverse_letter(x);
    n = -n;
  }
  return Word(std::vector<Word::Letter>(static_cast<std::size_t>(n), x));
}

Complex chart_velocity_to_complex(const Eigen::Vector2d& w) { return {w[1], w[0]}; }
Eigen::Vector2d complex_to_chart_velocity(Complex dz) { return {dz.imag(), dz.real()}; }

// Applies the Mobius map m to a phase point in the half-plane chart.
PhasePoint apply_mobius(const Eigen::Matrix2d& m, const PhasePoint& xi) {
  const Complex z(xi.base.v, xi.base.u);
  const Complex w = hyperbolic::mobius(m, z);
  const Complex dw = hyperbolic::mobius_derivative(m, z) * chart_velocity_to_complex(xi.velocity);
  PhasePoint out;
  out.base = {w.imag(), w.real(), ChartId::half_plane};
  out.velocity = complex_to_chart_velocity(dw);
  return out;
}

// Index into the letter table of an isometric circle containing z, if any.
// Points within rounding of a circle count as outside so that the reduction
// cannot bounce between paired circles.
int containing_circle(const std::vector<IsometricCircle>& circles, Complex z) {
  for (const auto& c : circles) {
    if (std::norm(z - c.center) < c.radius * c.radius * (1.0 - 1e-12)) return c.letter;
  }
  return -1;
}

LocalGeometry constant_local(ChartId chart, double core_length, const ChartPoint& p) {
  LocalGeometry L;
  L.christoffel[0].setZero();
  L.christoffel[1].setZero();
  L.curvature = -1.0;
  if (chart == ChartId::half_plane) {
    const double u = p.u;
    L.metric = Eigen::Matrix2d::Identity() / (u * u);
    L.christoffel[0](0, 0) = -1.0 / u;
    L.christoffel[0](1, 1) = 1.0 / u;
    L.christoffel[1](0, 1) = -1.0 / u;
    L.christoffel[1](1, 0) = -1.0 / u;
  } else {
    const double c = core_length / kTwoPi;
    const double f = c * std::cosh(p.u);
    const double df = c * std::sinh(p.u);
    L.metric << 1.0, 0.0, 0.0, f * f;
    L.christoffel[0](1, 1) = -f * df;
    L.christoffel[1](0, 1) = std::tanh(p.u);
    L.christoffel[1](1, 0) = std::tanh(p.u);
  }
  return L;
}

}  // namespace

MetricModel MetricModel::half_plane() {
  auto d = std::make_shared<Data>();
  return MetricModel(d);
}

MetricModel MetricModel::cylinder(double core_length) {
  if (!(core_length > 0.0) || !std::isfinite(core_length)) {
    throw ConfigError("cylinder core length must be positive and finite");
  }
  auto d = std::make_shared<Data>();
  d->kind = ModelKind::cylinder;
  d->chart = ChartId::cylinder;
  d->core_length = core_length;
  Eigen::Matrix2d g;
  g << std::exp(0.5 * core_length), 0.0, 0.0, std::exp(-0.5 * core_length);
  d->generators = {g};
  d->letters = letter_table(d->generators);
  d->inj = 0.5 * core_length;
  return MetricModel(d);
}

MetricModel MetricModel::schottky(std::vector<Eigen::Matrix2d> generators) {
  validate_schottky(generators);
  auto d = std::make_shared<Data>();
  d->kind = ModelKind::schottky;
  d->chart = ChartId::half_plane;
  d->generators = std::move(generators);
  d->letters = letter_table(d->generators);
  d->circles = isometric_circles(d->generators);
  if (d->generators.size() == 1) {
    d->inj = 0.5 * hyperbolic::translation_length(d->generators[0]);
  } else {
    // Words of length >= 3 are at least 3 D long; shorter ones are checked directly.
    double sys = 3.0 * circle_separation(d->generators);
    for (const Word& w : enumerate_classes(static_cast<int>(d->generators.size()), 2, true)) {
      sys = std::min(sys, exact_length(w, d->generators));
    }
    d->inj = 0.5 * sys;
  }
  return MetricModel(d);
}

MetricModel MetricModel::perturbed(const MetricModel& base, ChartPoint center, double radius,
                                   double amplitude) {
  if (base.kind() == ModelKind::perturbed) {
    throw ConfigError("perturbations of perturbed models are not supported");
  }
  if (!(std::abs(amplitude) < 0.2)) throw ConfigError("bump amplitude must lie in (-0.2, 0.2)");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigError("bump radius must be positive and finite");
  }
  center.chart = base.chart();
  if (!base.in_domain(center)) throw ConfigError("bump center lies outside the chart domain");

  switch (base.kind()) {
    case ModelKind::cylinder: {
      // The bump must not overlap its own translate under the deck group.
      const double ch = std::cosh(center.u);
      const double sh = std::sinh(center.u);
      const double gap = std::acosh(ch * ch * std::cosh(base.core_length()) - sh * sh);
      if (!(2.0 * radius < gap)) {
        throw ConfigError("bump radius too large: the bump overlaps its deck translate");
      }
      break;
    }
    case ModelKind::schottky: {
      const Complex z(center.v, center.u);
      if (containing_circle(base.d_->circles, z) >= 0) {
        throw ConfigError("bump center must lie in the fundamental domain");
      }
      for (const auto& c : base.d_->circles) {
        hyperbolic::Geodesic g;
        g.center = c.center;
        g.radius = c.radius;
        if (!(radius < hyperbolic::distance_to_geodesic(z, g))) {
          throw ConfigError("bump must lie inside the fundamental domain");
        }
      }
      break;
    }
    default:
      break;
  }

  auto d = std::make_shared<Data>(*base.d_);
  d->kind = ModelKind::perturbed;
  d->base = base;
  d->bump = {center, radius, amplitude};
  d->peak_scale = amplitude * std::numbers::e;
  d->inj = base.injectivity_radius_lower_bound() * std::exp(-std::abs(amplitude));
  return MetricModel(d);
}

ModelKind MetricModel::kind() const { return d_->kind; }
ChartId MetricModel::chart() const { return d_->chart; }
int MetricModel::rank() const { return static_cast<int>(d_->generators.size()); }
bool MetricModel::is_constant_curvature() const {
  return d_->kind != ModelKind::perturbed || d_->bump.amplitude == 0.0;
}
double MetricModel::injectivity_radius_lower_bound() const { return d_->inj; }

const MetricModel& MetricModel::unperturbed() const { return d_->base ? *d_->base : *this; }

const Bump& MetricModel::bump() const {
  if (d_->kind != ModelKind::perturbed) throw ConfigError("model has no perturbation");
  return d_->bump;
}

double MetricModel::core_length() const {
  if (d_->chart != ChartId::cylinder) throw ConfigError("model is not cylinder based");
  return d_->core_length;
}

const std::vector<Eigen::Matrix2d>& MetricModel::generators() const { return d_->generators; }

bool MetricModel::in_domain(const ChartPoint& p) const {
  if (p.chart != d_->chart || !std::isfinite(p.u) || !std::isfinite(p.v)) return false;
  return d_->chart == ChartId::cylinder || p.u > 0.0;
}

namespace {

// Second-order jet of the conformal exponent in chart coordinates.
Jet bump_jet(const MetricModel::Data& d, const MetricModel& base, const ChartPoint& p) {
  const Bump& b = d.bump;
  const Jet x0 = Jet::variable(p.u, 0);
  const Jet x1 = Jet::variable(p.v, 1);
  Jet w;
  if (d.chart == ChartId::cylinder) {
    const double k = d.core_length / kTwoPi;
    // nearest lift of the centre in theta
    const double shift = kTwoPi * std::round((p.v - b.center.v) / kTwoPi);
    const Jet ds = k * (x1 - (b.center.v + shift));
    w = std::cosh(b.center.u) * (detail::cosh(x0) * detail::cosh(ds)) -
        std::sinh(b.center.u) * detail::sinh(x0);
  } else {
    Jet re = x1;
    Jet im = x0;
    if (d.kind == ModelKind::perturbed && base.kind() == ModelKind::schottky) {
      const auto [reduced, g] = base.locate(PhasePoint{p, Eigen::Vector2d::Zero()});
      if (!g.empty()) {
        const Eigen::Matrix2d m = word_matrix(g, base.generators());
        const detail::ComplexJet z{re, im};
        const detail::ComplexJet num = detail::ComplexJet{Jet::constant(m(0, 0)), Jet::constant(0)} * z +
                                       detail::ComplexJet{Jet::constant(m(0, 1)), Jet::constant(0)};
        const detail::ComplexJet den = detail::ComplexJet{Jet::constant(m(1, 0)), Jet::constant(0)} * z +
                                       detail::ComplexJet{Jet::constant(m(1, 1)), Jet::constant(0)};
        const detail::ComplexJet zf = num / den;
        re = zf.re;
        im = zf.im;
      }
    }
    const Jet dx = re - b.center.v;
    const Jet dy = im - b.center.u;
    w = (dx * dx + dy * dy) * detail::reciprocal((2.0 * b.center.u) * im) + 1.0;
  }
  if (w.v < 1.0) w = w + (1.0 - w.v);  // rounding below 1 at the centre
  const Jet q = (1.0 / (b.radius * b.radius)) * detail::acosh_squared(w);
  if (q.v >= 1.0) return Jet::constant(0.0);
  return d.peak_scale * detail::exp(detail::reciprocal(q - 1.0));
}

}  // namespace

double MetricModel::conformal_exponent(const ChartPoint& p) const {
  if (d_->kind != ModelKind::perturbed) return 0.0;
  if (!in_domain(p)) throw DomainError("point outside the chart domain");
  return bump_jet(*d_, *d_->base, p).v;
}

LocalGeometry MetricModel::local(const ChartPoint& p) const {
  if (!in_domain(p)) {
    throw DomainError("point (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                      ") outside the chart domain");
  }
  LocalGeometry L0 = constant_local(d_->chart, d_->core_length, p);
  if (d_->kind != ModelKind::perturbed) return L0;
  const Jet phi = bump_jet(*d_, *d_->base, p);
  if (phi.v == 0.0 && phi.d.isZero() && phi.h.isZero()) return L0;

  LocalGeometry L;
  L.metric = std::exp(2.0 * phi.v) * L0.metric;
  const Eigen::Matrix2d ginv = L0.metric.inverse();
  const Eigen::Vector2d up = ginv * phi.d;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        L.christoffel[k](i, j) = L0.christoffel[k](i, j) + (k == i ? phi.d[j] : 0.0) +
                                 (k == j ? phi.d[i] : 0.0) - L0.metric(i, j) * up[k];
      }
    }
  }
  double lap = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double h = phi.h(i, j);
      for (int k = 0; k < 2; ++k) h -= L0.christoffel[k](i, j) * phi.d[k];
      lap += ginv(i, j) * h;
    }
  }
  L.curvature = std::exp(-2.0 * phi.v) * (L0.curvature - lap);
  return L;
}

ChartPoint MetricModel::deck(const Word& w, const ChartPoint& p) const {
  return deck(w, PhasePoint{p, Eigen::Vector2d::Zero()}).base;
}

PhasePoint MetricModel::deck(const Word& w, const PhasePoint& xi) const {
  if (w.empty()) return xi;
  if (w.max_generator() >= rank()) {
    throw ConfigError("word " + w.str() + " uses a generator the model does not have");
  }
  if (d_->chart == ChartId::cylinder) {
    long net = 0;
    for (Word::Letter x : w.letters()) net += (x & 1u) ? -1 : 1;
    PhasePoint out = xi;
    out.base.v += kTwoPi * static_cast<double>(net);
    return out;
  }
  return apply_mobius(word_matrix(w, d_->generators), xi);
}

std::pair<PhasePoint, Word> MetricModel::locate(const PhasePoint& xi) const {
  if (!in_domain(xi.base)) throw DomainError("point outside the chart domain");
  if (rank() == 0) return {xi, Word()};
  if (d_->chart == ChartId::cylinder) {
    const long n = static_cast<long>(std::floor(xi.base.v / kTwoPi));
    PhasePoint out = xi;
    out.base.v -= kTwoPi * static_cast<double>(n);
    return {out, letter_power(0, -n)};
  }
  if (d_->circles.empty()) {
    // rank one with c = 0: z -> k z + b', fundamental annulus about the finite fixed point
    const Eigen::Matrix2d& m = d_->generators[0];
    const double k = m(0, 0) / m(1, 1);
    const double x0 = m(0, 1) / (m(1, 1) - m(0, 0));
    const Complex z(xi.base.v, xi.base.u);
    const long n = static_cast<long>(std::floor(std::log(std::abs(z - x0)) / std::log(std::abs(k))));
    const Word g = letter_power(0, -n);
    return {deck(g, xi), g};
  }
  PhasePoint cur = xi;
  std::vector<Word::Letter> applied;  // in order of application
  for (int iter = 0; iter < 100000; ++iter) {
    const int x = containing_circle(d_->circles, Complex(cur.base.v, cur.base.u));
    if (x < 0) {
      std::reverse(applied.begin(), applied.end());
      return {cur, Word(applied)};
    }
    cur = apply_mobius(d_->letters[static_cast<std::size_t>(x)], cur);
    applied.push_back(static_cast<Word::Letter>(x));
  }
  throw DomainError("fundamental-domain reduction did not terminate");
}

std::vector<PhasePoint> MetricModel::neighbouring_lifts(const PhasePoint& xi) const {
  const PhasePoint reduced = locate(xi).first;
  std::vector<PhasePoint> out{reduced};
  for (int x = 0; x < 2 * rank(); ++x) {
    out.push_back(deck(Word({static_cast<Word::Letter>(x)}), reduced));
  }
  return out;
}

Complex MetricModel::to_hyperbolic(const ChartPoint& p) const {
  if (d_->chart == ChartId::half_plane) return {p.v, p.u};
  const double s = d_->core_length / kTwoPi * p.v;
  return std::exp(s) * Complex(std::tanh(p.u), 1.0 / std::cosh(p.u));
}

ChartPoint MetricModel::from_hyperbolic(Complex z) const {
  if (d_->chart == ChartId::half_plane) return {z.imag(), z.real(), ChartId::half_plane};
  const double m = std::abs(z);
  return {std::atanh(z.real() / m), kTwoPi * std::log(m) / d_->core_length, ChartId::cylinder};
}

Eigen::Matrix2d MetricModel::hyperbolic_jacobian(const ChartPoint& p) const {
  if (d_->chart == ChartId::half_plane) return Eigen::Matrix2d::Identity();
  const Complex z = to_hyperbolic(p);
  const double es = std::abs(z);
  const double sech = 1.0 / std::cosh(p.u);
  const Complex dr = es * Complex(sech * sech, -sech * std::tanh(p.u));
  const Complex dtheta = d_->core_length / kTwoPi * z;
  Eigen::Matrix2d J;
  J << dr.imag(), dtheta.imag(), dr.real(), dtheta.real();
  return J;
}

Eigen::Matrix2d metric_at(const MetricModel& model, const ChartPoint& p) {
  return model.local(p).metric;
}

double curvature_at(const MetricModel& model, const ChartPoint& p) {
  return model.local(p).curvature;
}

Eigen::Matrix2d orthonormal_frame(const Eigen::Matrix2d& g) {
  Eigen::Matrix2d E;
  const double s11 = std::sqrt(g(0, 0));
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
  E(0, 0) = 1.0 / s11;
  E(1, 0) = 0.0;
  const double n = std::sqrt(det / g(0, 0));
  E(0, 1) = -g(0, 1) / g(0, 0) / n;
  E(1, 1) = 1.0 / n;
  return E;
}

double speed(const MetricModel& model, const PhasePoint& xi) {
  const Eigen::Matrix2d g = metric_at(model, xi.base);
  return std::sqrt(xi.velocity.dot(g * xi.velocity));
}

double frame_angle(const MetricModel& model, const PhasePoint& xi) {
  const Eigen::Matrix2d E = orthonormal_frame(metric_at(model, xi.base));
  const Eigen::Vector2d c = E.inverse() * xi.velocity;
  return std::atan2(c[1], c[0]);
}

PhasePoint unit_phase_point(const MetricModel& model, const ChartPoint& p, double angle) {
  const Eigen::Matrix2d E = orthonormal_frame(metric_at(model, p));
  return {p, E * Eigen::Vector2d(std::cos(angle), std::sin(angle))};
}

// ---------------------------------------------------------------------------
// curvature bounds

ChartRect perturbation_support(const MetricModel& model) {
  const Bump& b = model.bump();
  const double R = b.radius;
  if (model.chart() == ChartId::cylinder) {
    const double ds = std::asinh(std::sinh(R) / std::cosh(b.center.u));
    const double dtheta = ds * kTwoPi / model.core_length();
    return {b.center.u - R, b.center.u + R, b.center.v - dtheta, b.center.v + dtheta};
  }
  return {b.center.u * std::exp(-R), b.center.u * std::exp(R), b.center.v - b.center.u * std::sinh(R),
          b.center.v + b.center.u * std::sinh(R)};
}

CurvatureBounds curvature_bounds(const MetricModel& model, const ChartRect& region, int grid,
                                 double margin) {
  if (grid < 16) throw ConfigError("curvature grid must have at least 16 points per axis");
  if (!(margin >= 0.0)) throw ConfigError("curvature margin must be non-negative");
  if (!(region.u_min < region.u_max) || !(region.v_min < region.v_max)) {
    throw ConfigError("curvature region is empty");
  }
  if (!model.in_domain({region.u_min, region.v_min, model.chart()})) {
    throw ConfigError("curvature region leaves the chart domain");
  }
  if (model.kind() == ModelKind::perturbed && !region.contains(perturbation_support(model))) {
    throw ConfigError("curvature region does not contain the perturbation support");
  }

  const double du = (region.u_max - region.u_min) / (grid - 1);
  const double dv = (region.v_max - region.v_min) / (grid - 1);
  auto K = [&](double u, double v) { return curvature_at(model, {u, v, model.chart()}); };

  struct Sample {
    double k, u, v;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double u = region.u_min + du * i;
      const double v = region.v_min + dv * j;
      const double k = K(u, v);
      if (!(k < 0.0)) {
        throw ConfigError("model is not negatively curved: K = " + std::to_string(k) + " at (" +
                          std::to_string(u) + ", " + std::to_string(v) + ")");
      }
      samples.push_back({k, u, v});
    }
  }

  CurvatureBounds out;
  out.sample_count = grid * grid;
  if (model.is_constant_curvature()) {
    out.k_min = out.k_max = -1.0;
    return out;
  }

  // compass search from the most extreme grid points; grids miss sharp extrema
  auto polish = [&](Sample s, double sign) {
    double step_u = du, step_v = dv;
    double best = sign * s.k;
    while (step_u > 1e-7 * du) {
      bool moved = false;
      for (int a = -1; a <= 1; ++a) {
        for (int c = -1; c <= 1; ++c) {
          if (a == 0 && c == 0) continue;
          const double u = std::clamp(s.u + a * step_u, region.u_min, region.u_max);
          const double v = std::clamp(s.v + c * step_v, region.v_min, region.v_max);
          const double val = sign * K(u, v);
          if (val < best) {
            best = val;
            s = {sign * val, u, v};
            moved = true;
          }
        }
      }
      if (!moved) {
        step_u *= 0.5;
        step_v *= 0.5;
      }
    }
    return s.k;
  };

  const std::size_t n_polish = std::min<std::size_t>(4, samples.size());
  std::vector<Sample> sorted = samples;
  std::partial_sort(sorted.begin(), sorted.begin() + n_polish, sorted.end(),
                    [](const Sample& a, const Sample& b) { return a.k < b.k; });
  double kmin = sorted.front().k;
  for (std::size_t i = 0; i < n_polish; ++i) kmin = std::min(kmin, polish(sorted[i], 1.0));
  std::partial_sort(sorted.begin(), sorted.begin() + n_polish, sorted.end(),
                    [](const Sample& a, const Sample& b) { return a.k > b.k; });
  double kmax = sorted.front().k;
  for (std::size_t i = 0; i < n_polish; ++i) kmax = std::max(kmax, polish(sorted[i], -1.0));
  if (!(kmax < 0.0)) throw ConfigError("model is not negatively curved");

  out.k_min = kmin;
  out.k_max = kmax;
  out.margin = margin;
  // outside the region the curvature is exactly -1
  out.k1 = std::sqrt(-std::min(kmin, -1.0)) * (1.0 + margin);
  out.k2 = std::sqrt(-std::max(kmax, -1.0)) / (1.0 + margin);
  return out;
}

CurvatureBounds curvature_bounds(const MetricModel& model, int grid, double margin) {
  if (model.kind() != ModelKind::perturbed) {
    ChartRect region = model.chart() == ChartId::cylinder ? ChartRect{-1.0, 1.0, 0.0, kTwoPi}
                                                          : ChartRect{0.5, 2.0, -1.0, 1.0};
    return curvature_bounds(model, region, grid, margin);
  }
  ChartRect r = perturbation_support(model);
  const double pu = 0.1 * (r.u_max - r.u_min);
  const double pv = 0.1 * (r.v_max - r.v_min);
  r = {r.u_min - pu, r.u_max + pu, r.v_min - pv, r.v_max + pv};
  if (model.chart() == ChartId::half_plane) r.u_min = std::max(r.u_min, 0.5 * model.bump().center.u * std::exp(-model.bump().radius));
  return curvature_bounds(model, r, grid, margin);
}

// ---------------------------------------------------------------------------
// monodromy

double Monodromy::determinant() const {
  if (factors.empty()) return matrix.determinant();
  double d = 1.0;
  for (const auto& f : factors) d *= f.determinant();
  return d;
}

void Monodromy::update_eigenvalues() {
  const double tr = matrix.trace();
  const double det = determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) {
    eigenvalues = {std::nan(""), std::nan("")};
    return;
  }
  const double lu = 0.5 * (tr + std::copysign(std::sqrt(disc), tr));
  eigenvalues = {lu, det / lu};
}

Monodromy Monodromy::power(int k) const {
  if (k < 1) throw ConfigError("monodromy power must be >= 1");
  Monodromy out;
  out.matrix = Eigen::Matrix2d::Identity();
  for (int i = 0; i < k; ++i) {
    out.matrix = matrix * out.matrix;
    out.factors.insert(out.factors.end(), factors.begin(), factors.end());
  }
  if (factors.empty()) out.factors.assign(static_cast<std::size_t>(k), matrix);
  out.base_length = base_length * k;
  out.update_eigenvalues();
  return out;
}

// ---------------------------------------------------------------------------
// integration

namespace {

namespace odeint = boost::numeric::odeint;

void check_flow_args(double t, double tol) {
  if (!std::isfinite(t)) throw ConfigError("flow time must be finite");
  if (!(tol >= 1e-13 && tol <= 1e-6)) throw ConfigError("flow tolerance must lie in [1e-13, 1e-6]");
}

bool unwraps(const MetricModel& model) {
  return model.chart() == ChartId::half_plane && model.rank() > 0;
}

void geodesic_rhs(const MetricModel& model, const double* x, double* dx) {
  const ChartPoint p{x[0], x[1], model.chart()};
  if (!model.in_domain(p)) throw ChartError("geodesic left the chart domain");
  const LocalGeometry L = model.local(p);
  dx[0] = x[2];
  dx[1] = x[3];
  for (int k = 0; k < 2; ++k) {
    const auto& G = L.christoffel[k];
    dx[2 + k] = -(G(0, 0) * x[2] * x[2] + 2.0 * G(0, 1) * x[2] * x[3] + G(1, 1) * x[3] * x[3]);
  }
}

template <class State, class System, class After>
void drive(System&& sys, State& x, double duration, double tol, After&& after) {
  // local error target below the requested tolerance so that drift over long runs stays within it
  odeint::bulirsch_stoer<State> stepper(kLocalErrorFraction * tol, kLocalErrorFraction * tol);
  double t = 0.0;
  double dt = std::min(0.1, duration);
  long steps = 0;
  const double eps = 1e-14 * std::max(1.0, duration);
  while (duration - t > eps) {
    odeint::controlled_step_result res;
    try {
      double step = std::min(dt, duration - t);
      res = stepper.try_step(sys, x, t, step);
      dt = step;
    } catch (const ChartError&) {
      stepper.reset();
      dt *= 0.25;
      if (dt < eps) throw;
      continue;
    }
    if (res == odeint::success) after(x);
    if (++steps > 5'000'000) throw ChartError("integration step budget exhausted");
  }
}

// Flow state: position, velocity and, for Jacobi runs, the 2x2 fundamental
// matrix (column-major).
template <std::size_t N>
struct FlowRun {
  const MetricModel& model;
  double tol;
  bool renormalize;
  double speed2 = 1.0;
  Eigen::Matrix2d unwrap = Eigen::Matrix2d::Identity();  // maps integration chart to cover

  void operator()(const std::array<double, N>& x, std::array<double, N>& dx, double) const {
    geodesic_rhs(model, x.data(), dx.data());
    if constexpr (N == 8) {
      const double K = model.local({x[0], x[1], model.chart()}).curvature * speed2;
      // Y' = [[0, 1], [-K, 0]] Y
      dx[4] = x[5];
      dx[5] = -K * x[4];
      dx[6] = x[7];
      dx[7] = -K * x[6];
    }
  }

  void after_step(std::array<double, N>& x) {
    if (renormalize) {
      const Eigen::Matrix2d g = model.local({x[0], x[1], model.chart()}).metric;
      const Eigen::Vector2d v(x[2], x[3]);
      const double s = std::sqrt(speed2 / v.dot(g * v));
      x[2] *= s;
      x[3] *= s;
    }
    if (unwraps(model)) {
      const PhasePoint xi{{x[0], x[1], ChartId::half_plane}, {x[2], x[3]}};
      const auto [reduced, g] = model.locate(xi);
      if (!g.empty()) {
        x[0] = reduced.base.u;
        x[1] = reduced.base.v;
        x[2] = reduced.velocity[0];
        x[3] = reduced.velocity[1];
        unwrap = unwrap * word_matrix(g.inverse(), model.generators());
      }
    }
  }
};

template <std::size_t N>
PhasePoint begin_run(FlowRun<N>& run, const PhasePoint& xi, std::array<double, N>& x) {
  PhasePoint start = xi;
  if (unwraps(run.model)) {
    const auto [reduced, g] = run.model.locate(xi);
    start = reduced;
    run.unwrap = word_matrix(g.inverse(), run.model.generators());
  }
  x[0] = start.base.u;
  x[1] = start.base.v;
  x[2] = start.velocity[0];
  x[3] = start.velocity[1];
  return start;
}

template <std::size_t N>
PhasePoint end_run(const FlowRun<N>& run, const std::array<double, N>& x) {
  PhasePoint out{{x[0], x[1], run.model.chart()}, {x[2], x[3]}};
  if (unwraps(run.model) && !run.unwrap.isIdentity(0.0)) out = apply_mobius(run.unwrap, out);
  return out;
}

PhasePoint flipped(PhasePoint xi) {
  xi.velocity = -xi.velocity;
  return xi;
}

}  // namespace

PhasePoint integrate_geodesic(const MetricModel& model, const PhasePoint& xi, double t, double tol,
                              bool renormalize) {
  check_flow_args(t, tol);
  if (!model.in_domain(xi.base)) throw DomainError("initial point outside the chart domain");
  if (t < 0.0) return flipped(integrate_geodesic(model, flipped(xi), -t, tol, renormalize));
  if (t == 0.0) return xi;
  FlowRun<4> run{model, tol, renormalize};
  run.speed2 = speed(model, xi) * speed(model, xi);
  std::array<double, 4> x{};
  begin_run(run, xi, x);
  drive(run, x, t, tol, [&](std::array<double, 4>& s) { run.after_step(s); });
  return end_run(run, x);
}

JacobiFlow integrate_jacobi_flow(const MetricModel& model, const PhasePoint& xi, double t,
                                 double tol) {
  check_flow_args(t, tol);
  if (!model.in_domain(xi.base)) throw DomainError("initial point outside the chart domain");
  if (t < 0.0) {
    JacobiFlow back = integrate_jacobi_flow(model, flipped(xi), -t, tol);
    const Eigen::Matrix2d S = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    back.end = flipped(back.end);
    back.monodromy.matrix = S * back.monodromy.matrix * S;
    for (auto& f : back.monodromy.factors) f = S * f * S;
    back.monodromy.update_eigenvalues();
    return back;
  }
  JacobiFlow out;
  out.end = xi;
  out.monodromy.base_length = t;
  if (t == 0.0) return out;

  FlowRun<8> run{model, tol, false};
  run.speed2 = speed(model, xi) * speed(model, xi);
  std::array<double, 8> x{};
  begin_run(run, xi, x);
  // unit-time pieces restarted at the identity keep every factor well conditioned
  const int pieces = std::max(1, static_cast<int>(std::ceil(t - 1e-9)));
  const double h = t / pieces;
  for (int i = 0; i < pieces; ++i) {
    x[4] = 1.0;
    x[5] = 0.0;
    x[6] = 0.0;
    x[7] = 1.0;
    drive(run, x, h, tol, [&](std::array<double, 8>& s) { run.after_step(s); });
    Eigen::Matrix2d F;
    F << x[4], x[6], x[5], x[7];
    out.monodromy.factors.push_back(F);
    out.monodromy.matrix = F * out.monodromy.matrix;
  }
  out.monodromy.update_eigenvalues();
  out.end = end_run(run, x);
  return out;
}

Monodromy integrate_jacobi(const MetricModel& model, const PhasePoint& xi, double t, double tol) {
  return integrate_jacobi_flow(model, xi, t, tol).monodromy;
}

std::vector<PhasePoint> sample_geodesic(const MetricModel& model, const PhasePoint& xi, double t,
                                        int count, double tol) {
  if (count < 1) throw ConfigError("sample count must be positive");
  std::vector<PhasePoint> out{xi};
  const double h = t / count;
  for (int j = 1; j < count; ++j) out.push_back(integrate_geodesic(model, out.back(), h, tol));
  return out;
}

// ---------------------------------------------------------------------------
// log and exp maps

namespace {

Eigen::Vector2d to_chart_velocity(const MetricModel& model, const ChartPoint& p, Complex dz) {
  return model.hyperbolic_jacobian(p).inverse() * complex_to_chart_velocity(dz);
}

Complex to_complex_velocity(const MetricModel& model, const ChartPoint& p,
                            const Eigen::Vector2d& w) {
  return chart_velocity_to_complex(model.hyperbolic_jacobian(p) * w);
}

Segment connect_constant(const MetricModel& model, const ChartPoint& p, const ChartPoint& q) {
  const Complex a = model.to_hyperbolic(p);
  const Complex b = model.to_hyperbolic(q);
  const auto fwd = hyperbolic::direction(a, b);
  Segment s;
  s.length = fwd.distance;
  if (fwd.distance == 0.0) return s;
  const auto bwd = hyperbolic::direction(b, a);
  s.initial_velocity = to_chart_velocity(model, p, fwd.tangent * fwd.distance);
  s.terminal_velocity = to_chart_velocity(model, q, -bwd.tangent * fwd.distance);
  return s;
}

double flow_tol(double tol) { return std::clamp(0.1 * tol, 1e-13, 1e-6); }

}  // namespace

PhasePoint exp_map(const MetricModel& model, const ChartPoint& p, const Eigen::Vector2d& w,
                   double tol) {
  if (!model.in_domain(p)) throw DomainError("point outside the chart domain");
  if (model.is_constant_curvature()) {
    const auto [z, dz] = hyperbolic::exp(model.to_hyperbolic(p), to_complex_velocity(model, p, w));
    const ChartPoint q = model.from_hyperbolic(z);
    return {q, to_chart_velocity(model, q, dz)};
  }
  return integrate_geodesic(model, {p, w}, 1.0, flow_tol(tol));
}

Segment connect(const MetricModel& model, const ChartPoint& p, const ChartPoint& q, double tol) {
  if (!model.in_domain(p) || !model.in_domain(q)) {
    throw DomainError("point outside the chart domain");
  }
  if (model.is_constant_curvature()) return connect_constant(model, p, q);

  // shooting from the unperturbed solution
  const Segment seed = connect_constant(model.unperturbed(), p, q);
  if (seed.length == 0.0) return seed;
  const Eigen::Matrix2d Ep = orthonormal_frame(metric_at(model, p));
  const Eigen::Matrix2d Eq_inv = orthonormal_frame(metric_at(model, q)).inverse();
  Eigen::Vector2d c = Ep.inverse() * seed.initial_velocity;
  auto residual = [&](const Eigen::Vector2d& cc, PhasePoint* end) {
    const PhasePoint e = integrate_geodesic(model, {p, Ep * cc}, 1.0, flow_tol(tol));
    if (end) *end = e;
    return Eigen::Vector2d(Eq_inv * (e.base.coords() - q.coords()));
  };
  PhasePoint end;
  Eigen::Vector2d r = residual(c, &end);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 40; ++iter) {
    const double scale = tol * std::max(1.0, c.norm());
    // stalled within a small multiple of tol: the flow's own error floor
    const bool floor = r.norm() > 0.5 * previous && r.norm() <= 100.0 * scale;
    if (r.norm() <= scale || floor) {
      Segment s;
      s.initial_velocity = Ep * c;
      s.terminal_velocity = end.velocity;
      s.length = c.norm();
      return s;
    }
    const double h = 1e-6 * std::max(1.0, c.norm());
    Eigen::Matrix2d J;
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[i] = h;
      J.col(i) = (residual(c + e, nullptr) - residual(c - e, nullptr)) / (2.0 * h);
    }
    const Eigen::Vector2d step = J.partialPivLu().solve(r);
    previous = r.norm();
    double lambda = 1.0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::Vector2d trial = c - lambda * step;
      PhasePoint trial_end;
      Eigen::Vector2d rt;
      try {
        rt = residual(trial, &trial_end);
      } catch (const ChartError&) {
        lambda *= 0.5;
        continue;
      }
      if (rt.norm() < r.norm() || k == 19) {
        c = trial;
        r = rt;
        end = trial_end;
        break;
      }
      lambda *= 0.5;
    }
  }
  throw NonConvergenceError("geodesic shooting did not converge", r.norm());
}

ChartPoint geodesic_midpoint(const MetricModel& model, const ChartPoint& p, const ChartPoint& q,
                             double tol) {
  if (model.is_constant_curvature()) {
    const Complex a = model.to_hyperbolic(p);
    const auto d = hyperbolic::direction(a, model.to_hyperbolic(q));
    if (d.distance == 0.0) return p;
    return model.from_hyperbolic(hyperbolic::exp(a, 0.5 * d.distance * d.tangent).first);
  }
  const Segment s = connect(model, p, q, tol);
  return exp_map(model, p, 0.5 * s.initial_velocity, tol).base;
}

double geodesic_distance(const MetricModel& model, const ChartPoint& p, const ChartPoint& q,
                         double tol) {
  if (model.is_constant_curvature()) {
    if (!model.in_domain(p) || !model.in_domain(q)) {
      throw DomainError("point outside the chart domain");
    }
    return hyperbolic::distance(model.to_hyperbolic(p), model.to_hyperbolic(q));
  }
  return connect(model, p, q, tol).length;
}

namespace {

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

}  // namespace

double sasaki_distance(const MetricModel& model, const PhasePoint& xi1, const PhasePoint& xi2) {
  const double inj = model.injectivity_radius_lower_bound();
  // cheap screen with the unperturbed distance before any shooting
  const double rough = geodesic_distance(model.unperturbed(), xi1.base, xi2.base);
  if (rough > inj * (model.is_constant_curvature() ? 1.0 : 2.0)) {
    throw RangeError("phase points are beyond the injectivity radius");
  }
  if (rough < 1e-12) {
    const double fiber = wrap_angle(frame_angle(model, xi2) - frame_angle(model, xi1));
    return std::hypot(rough, fiber);
  }
  const Segment s = connect(model, xi1.base, xi2.base);
  if (s.length > inj) throw RangeError("phase points are beyond the injectivity radius");
  // In two dimensions parallel transport along the connecting geodesic keeps
  // the angle to its tangent.
  const double a1 = frame_angle(model, xi1) - frame_angle(model, {xi1.base, s.initial_velocity});
  const double a2 = frame_angle(model, xi2) - frame_angle(model, {xi2.base, s.terminal_velocity});
  return std::hypot(s.length, wrap_angle(a2 - a1));
}

}  // namespace lenspec
