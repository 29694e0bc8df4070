#include <doctest.h>

#include <cmath>
#include <complex>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "fixtures.hpp"
#include "lenspec/analysis.hpp"
#include "lenspec/errors.hpp"
#include "lenspec/orbits.hpp"
#include "lenspec/schottky.hpp"

using namespace lenspec;
using lenspec::testing::exact_schottky_spectrum;
using lenspec::testing::single_primitive_spectrum;
using lenspec::testing::synthetic_pot_spectrum;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

// exp(sum_k e^{-k s l} / (k (e^{kl/2} - e^{-kl/2}))) for one primitive of length l
double weighted_single_orbit_oracle(double l, double s, int k_max) {
  Big sum = 0;
  const Big L = l;
  for (int k = 1; k <= k_max; ++k) {
    const Big kl = k * L;
    sum += exp(-s * kl) / (k * (exp(kl / 2) - exp(-kl / 2)));
  }
  return static_cast<double>(exp(sum));
}

LengthSpectrum with_unit_weights(const LengthSpectrum& spec) {
  LengthSpectrum out(spec.max_length(), spec.convention());
  for (const auto& e : spec.primitives()) out.insert(make_entry(e.word, e.primitive_length, 1, 1.0));
  return out;
}

}  // namespace

TEST_CASE("zeta of a single primitive has the geometric closed form") {
  const auto cyl = single_primitive_spectrum(2.0);
  const auto z = zeta(cyl, 1.0, 200);
  CHECK(std::abs(z.value - 1.0 / (1.0 - std::exp(-2.0))) < 1e-10);
  CHECK(z.value.real() == doctest::Approx(1.1565176).epsilon(1e-7));
  CHECK(z.convergent);

  for (double l : {0.5, 1.0, 3.0}) {
    for (double s : {0.4, 1.0, 2.5}) {
      if (s * l < 0.2) continue;
      const auto spec = single_primitive_spectrum(l);
      const int k_max = static_cast<int>(std::ceil(200.0 / (s * l)));
      CHECK(std::abs(zeta(spec, s, k_max).value - 1.0 / (1.0 - std::exp(-s * l))) < 1e-10);
    }
  }
  CHECK(zeta(LengthSpectrum(5.0), 1.0, 10).value == std::complex<double>(1.0, 0.0));
}

TEST_CASE("weighted zeta") {
  const auto cyl = single_primitive_spectrum(2.0);
  const auto first = weighted_zeta(cyl, 1.0, 1);
  CHECK(first.log_value.real() == doctest::Approx(std::exp(-2.0) / (2 * std::sinh(1.0))).epsilon(1e-14));
  CHECK(first.log_value.real() == doctest::Approx(0.0575797).epsilon(1e-6));

  const auto schottky = exact_schottky_spectrum(4);
  const auto ones = with_unit_weights(schottky);
  CHECK(std::abs(weighted_zeta(ones, 1.5, 1).value - zeta(ones, 1.5, 1).value) < 1e-14);

  const double oracle = weighted_single_orbit_oracle(2.0, 0.0, 400);
  CHECK(std::abs(weighted_zeta(cyl, 0.0, 400).value.real() - oracle) < 1e-10);
}

TEST_CASE("zeta truncation on the Schottky spectrum stays inside the tail bound") {
  const auto full = exact_schottky_spectrum(6);
  const auto h = estimate_entropy(full).h;
  const auto cut = truncated(full, full.max_length() - 1.0);
  const auto z_full = zeta(full, 2.0, 50);
  const auto z_cut = zeta(cut, 2.0, 50);
  CHECK(2.0 > h + kZetaGap);
  CHECK(std::isfinite(z_cut.tail_bound));
  CHECK(std::abs(z_full.value - z_cut.value) < 1e-8);
  CHECK(std::abs(z_full.value - z_cut.value) <= z_cut.tail_bound);
  // no bound close to the abscissa
  CHECK(std::isinf(zeta(full, h + 0.05, 50).tail_bound));
  CHECK_FALSE(zeta(full, 0.5 * h, 50).convergent);
}

TEST_CASE("entropy estimates") {
  const auto cyl = single_primitive_spectrum(2.0);
  const auto e0 = estimate_entropy(cyl);
  CHECK(e0.vacuous);
  CHECK(e0.h == 0.0);

  const auto synth = synthetic_pot_spectrum(0.5, 24.0);
  CHECK(synth.count(20.0) == std::lround(std::exp(10.0) / 10.0));
  const auto e = estimate_entropy(synth);
  CHECK(e.h == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(e.h - 0.5) <= 0.05);
  CHECK(e.window.hi == 24.0);
  CHECK(e.window.lo == 12.0);

  const auto schottky = exact_schottky_spectrum(6);
  const double H = schottky.max_length();
  const double h = estimate_entropy(schottky).h;
  CHECK(h > 0.1);
  CHECK(std::abs(estimate_entropy(schottky, Window{H / 2 - 1, H - 1}).h - h) <= 0.05);
  CHECK(std::abs(estimate_entropy(schottky, Window{H / 2 + 1, H}).h - h) <= 0.05);

  CHECK_THROWS_AS(estimate_entropy(LengthSpectrum(5.0)), DegenerateEstimateError);
  CHECK_THROWS_AS(estimate_entropy(schottky, Window{5.0, H + 1}), IncompleteHorizonError);
}

TEST_CASE("pressure identities on constant-curvature data") {
  const auto spec = exact_schottky_spectrum(6);
  const auto p0 = estimate_pressure(spec, Potential::zero());
  const auto h = estimate_entropy(spec);
  CHECK(std::abs(p0.p - h.h) <= 2 * std::hypot(p0.stderr_p, h.stderr_h));
  for (double c : {-0.5, -0.3, 0.2}) {
    const auto pc = estimate_pressure(spec, Potential::constant(c));
    CHECK_MESSAGE(std::abs(pc.p - p0.p - c) <= 2 * pc.stderr_p, "c = " << c);
  }
  const auto srb = estimate_pressure(spec, Potential::srb_half());
  CHECK(std::abs(srb.p - (p0.p - 0.5)) <= 2 * srb.stderr_p);

  CHECK(Potential::srb_half().orbit_integral(3.0, 2 * std::sinh(1.5), 1) ==
        doctest::Approx(-1.5).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_pressure(spec, Potential::zero(), Window{10.0, 11.0}, 0.5), BinningError);
}

TEST_CASE("test functions") {
  const TestFunction phi(2.0, 1.0);
  CHECK(phi(2.0) == doctest::Approx(1.0));
  CHECK(phi(1.5) == 0.0);
  CHECK(phi(2.5) == 0.0);
  CHECK(phi(3.0) == 0.0);
  for (double t = 1.5; t <= 2.5; t += 0.01) {
    CHECK(phi(t) >= 0.0);
    CHECK(phi(t) <= 1.0);
  }
  CHECK_THROWS_AS(TestFunction(0.2, 1.0), DomainError);
}

TEST_CASE("trace pairing") {
  const auto cyl = single_primitive_spectrum(2.0);
  CHECK(dynamical_trace(cyl, TestFunction(2.0, 1.0)) == doctest::Approx(1.0 / std::sinh(1.0)).epsilon(1e-12));
  CHECK(dynamical_trace(cyl, TestFunction(2.0, 1.0)) == doctest::Approx(0.850918).epsilon(1e-6));
  CHECK(dynamical_trace(cyl, TestFunction(1.0, 1.0)) == 0.0);
  CHECK_THROWS_AS(dynamical_trace(cyl, TestFunction(8.0, 1.0)), IncompleteHorizonError);

  // term-by-term oracle over the exact length list
  const auto spec = exact_schottky_spectrum(4);
  const auto gens = lenspec::testing::schottky_generators();
  const auto phi = TestFunction::on_support(1.0, 8.0);
  double oracle = 0.0;
  for (const auto& w : enumerate_classes(gens, 4, true)) {
    const double l = exact_length(w, gens);
    for (int k = 1; k * l < 8.0; ++k) oracle += l * phi(k * l) / (2 * std::sinh(k * l / 2));
  }
  CHECK(dynamical_trace(spec, phi) == doctest::Approx(oracle).epsilon(1e-10));

  // linear and monotone in the test function
  const TestFunction f(4.0, 3.0);
  const TestFunction g(5.0, 4.0);
  auto combo = [&](double t) { return 2.0 * f(t) + 0.5 * g(t); };
  CHECK(dynamical_trace(spec, combo, 2.0, 7.0) ==
        doctest::Approx(2.0 * dynamical_trace(spec, f) + 0.5 * dynamical_trace(spec, g)).epsilon(1e-12));
  auto bigger = [&](double t) { return f(t) + g(t); };
  CHECK(dynamical_trace(spec, bigger, 2.0, 7.0) >= dynamical_trace(spec, f));
}

TEST_CASE("prime orbit ratios") {
  const auto synth = synthetic_pot_spectrum(0.5, 24.0);
  const auto table = pot_ratio(synth, 0.5, {12.0, 18.0, 24.0});
  CHECK_FALSE(table.vacuous);
  CHECK(table.rows.back().ratio >= 0.9);
  CHECK(table.rows.back().ratio <= 1.1);
  CHECK(pot_ratio(single_primitive_spectrum(2.0), 0.0, {4.0}).vacuous);
}

TEST_CASE("corollary classifier") {
  const auto yes = corollary_arithmetic(0.7, 1.0, 1.0, 1);
  CHECK(yes.outcome == CorollaryOutcome::point_spectrum);
  CHECK(yes.message == "implies point spectrum, s₀ ≥ 0.7");
  CHECK(yes.s0_lower_bound == doctest::Approx(0.7));
  const auto no = corollary_arithmetic(0.3, 1.0, 1.0, 1);
  CHECK(no.outcome == CorollaryOutcome::empty_point_spectrum);
  CHECK(no.message == "implies empty point spectrum");
  const auto maybe = corollary_arithmetic(0.6, 1.4, 0.8, 1);
  CHECK(maybe.outcome == CorollaryOutcome::inconclusive);
  CHECK(maybe.message == "inconclusive");
  CHECK(maybe.lower_threshold == doctest::Approx(0.4));
  CHECK(maybe.upper_threshold == doctest::Approx(0.7));
  CHECK_THROWS_AS(corollary_arithmetic(0.5, 0.9, 0.8, 1), DomainError);
}

TEST_CASE("separation checks") {
  const auto model = lenspec::testing::schottky_model();
  const auto a = find_closed_geodesic(model, Word::parse("a"));
  const auto b = find_closed_geodesic(model, Word::parse("b"));

  const auto single = separation_check({a}, model, a.length + 0.1, 1.0, 2.5, 32);
  CHECK(single.vacuous);
  CHECK(single.pass);

  const auto twin = separation_check({a, a}, model, a.length + 0.1, 1.0, 2.5, 32);
  CHECK_FALSE(twin.pass);
  CHECK(twin.min_distance == doctest::Approx(0.0).epsilon(1e-9));

  const double T = b.length + 0.1;
  const double delta = T - a.length + 0.1;
  // the threshold 2 e^{-BT} shrinks as B grows, so the margin can only widen
  double prev_margin = -1e300;
  double prev_ratio = 1e300;
  for (double B : {0.5, 1.0, 2.5, 4.0}) {
    const auto r = separation_check({a, b}, model, T, delta, B, 64);
    CHECK(r.orbit_count == 2);
    CHECK(r.margin >= prev_margin);
    CHECK(r.overlap_ratio <= prev_ratio);
    prev_margin = r.margin;
    prev_ratio = r.overlap_ratio;
    if (B == 2.5) {
      CHECK(r.pass);
      CHECK(r.margin > 0.0);
    }
  }
}
