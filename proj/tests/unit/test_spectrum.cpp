#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fixtures.hpp"
#include "lenspec/errors.hpp"
#include "lenspec/schottky.hpp"
#include "lenspec/spectrum.hpp"

using namespace lenspec;

#ifndef LENSPEC_TEST_DATA_DIR
#error "LENSPEC_TEST_DATA_DIR must point at tests/data"
#endif

namespace {

const CountingConvention kPrimitive{Multiplicity::primitive, Orientation::unoriented};
const CountingConvention kIterates{Multiplicity::with_iterates, Orientation::unoriented};
const CountingConvention kOriented{Multiplicity::primitive, Orientation::oriented};

LengthSpectrum cylinder_spectrum() {
  LengthSpectrum s(8.0);
  s.insert(make_entry(Word::parse("a"), 2.0, 1, 2 * std::sinh(1.0)));
  return s;
}

}  // namespace

TEST_CASE("insert deduplicates by word and keeps entries sorted") {
  LengthSpectrum s;
  s.insert(make_entry(Word::parse("a"), 2.0, 1, 1.0, 1e-9));
  CHECK(s.size() == 1);
  s.insert(make_entry(Word::parse("a"), 2.0 + 1e-12, 1, 1.0, 1e-12));
  CHECK(s.size() == 1);
  CHECK(s.entries()[0].residual == 1e-12);
  s.insert(make_entry(Word::parse("a"), 2.5, 1, 1.0, 1e-3));
  CHECK(s.entries()[0].primitive_length == 2.0 + 1e-12);

  LengthSpectrum r;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> L(0.5, 20.0);
  std::vector<double> lengths;
  const auto words = enumerate_classes(2, 7, true);
  for (int i = 0; i < 100; ++i) {
    const double l = L(rng);
    lengths.push_back(l);
    r.insert(make_entry(words.at(i), l, 1, 1.0));
  }
  std::sort(lengths.begin(), lengths.end());
  REQUIRE(r.size() == 100);
  for (std::size_t i = 0; i < lengths.size(); ++i) CHECK(r.entries()[i].total_length == lengths[i]);
}

TEST_CASE("counting conventions on the cylinder") {
  const auto s = cylinder_spectrum();
  CHECK(s.count(7.0, kIterates) == 3);
  CHECK(s.count(7.0, kPrimitive) == 1);
  CHECK(s.count(7.0, kOriented) == 2);
  CHECK(s.count(0.0) == 0);
  CHECK(LengthSpectrum(10.0).count(5.0) == 0);
  CHECK_THROWS_AS(s.count(9.0), IncompleteHorizonError);
}

TEST_CASE("counts are monotone and iterate counts sum floors") {
  const auto spec = lenspec::testing::exact_schottky_spectrum(5);
  long prev = 0;
  for (double T = 0.0; T <= spec.max_length(); T += 0.05) {
    const long n = spec.count(T);
    CHECK(n >= prev);
    prev = n;
    long floors = 0;
    for (const auto& e : spec.primitives()) floors += static_cast<long>(std::floor(T / e.primitive_length));
    CHECK(spec.count(T, kIterates) == floors);
  }
}

TEST_CASE("iterate rows and truncation") {
  auto s = cylinder_spectrum();
  expand_iterates(s);
  REQUIRE(s.size() == 4);
  const auto* third = s.find(Word::parse("a"), 3);
  REQUIRE(third != nullptr);
  CHECK(third->total_length == doctest::Approx(6.0));
  CHECK(third->weight == doctest::Approx(2 * std::sinh(3.0)).epsilon(1e-12));
  CHECK(iterate_weight(2 * std::sinh(0.5), 2) == doctest::Approx(2 * std::sinh(1.0)).epsilon(1e-12));
  // stored iterate rows do not change the counts
  CHECK(s.count(7.0, kIterates) == 3);

  const auto t = truncated(s, 5.0);
  CHECK(t.max_length() == 5.0);
  CHECK(t.size() == 2);
  CHECK_THROWS_AS(truncated(s, 9.0), IncompleteHorizonError);
}

TEST_CASE("merge is order independent") {
  const auto words = enumerate_classes(2, 3, true);
  LengthSpectrum a(10.0), b(12.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    (i % 2 ? a : b).insert(make_entry(words[i], 1.0 + i, 1, 1.0, 1e-10));
  }
  b.insert(make_entry(words[1], 2.0, 1, 1.0, 1e-12));
  LengthSpectrum ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab == ba);
  CHECK(ab.max_length() == 10.0);
}

TEST_CASE("CSV round trip is exact") {
  auto spec = lenspec::testing::exact_schottky_spectrum(4);
  expand_iterates(spec);
  spec.seed = 42;
  spec.config_hash = "0123456789abcdef";
  const std::string dir = lenspec::testing::scratch_dir("spectrum_roundtrip");
  save(spec, dir + "/s.csv");
  const auto back = load(dir + "/s.csv");
  CHECK(back == spec);
  CHECK(back.seed == 42);
  CHECK(back.config_hash == "0123456789abcdef");
  CHECK(to_csv(back, {false}) == to_csv(spec, {false}));
  CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("CSV validation") {
  const std::string header =
      "# lenspec length spectrum\n# horizon=8\nword,primitive_length,k,total_length,weight,residual\n";
  CHECK_THROWS_AS(from_csv(header + "a,2,1,2,-1,0\n"), ParseError);
  CHECK_THROWS_AS(from_csv(header + "a,2,2,5,1,0\n"), ParseError);
  CHECK_THROWS_AS(from_csv(header + "a,2,1,2\n"), ParseError);
  CHECK_THROWS_AS(from_csv("a,2,1,2,1,0\n"), ParseError);
  CHECK(from_csv(header + "a,2,1,2,,0\n").entries()[0].has_weight() == false);
}

TEST_CASE("golden cylinder spectrum") {
  const auto s = load(std::string(LENSPEC_TEST_DATA_DIR) + "/cylinder_spectrum.csv");
  CHECK(s.count(7.0, kIterates) == 3);
  CHECK(s.count(7.0, kPrimitive) == 1);
  CHECK(s.entries()[0].primitive_length == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("counting convention names") {
  CHECK(CountingConvention::parse("with_iterates_oriented") ==
        CountingConvention{Multiplicity::with_iterates, Orientation::oriented});
  CHECK(kPrimitive.str() == "primitive_unoriented");
  CHECK_THROWS_AS(CountingConvention::parse("all"), ConfigError);
}
