#include "fixtures.hpp"

#include <cmath>
#include <filesystem>

#include "lenspec/schottky.hpp"

namespace lenspec::testing {

Eigen::Matrix2d circle_pairing(double x1, double x2, double r) {
  const double c = 1.0 / r;
  Eigen::Matrix2d m;
  m << x2 * c, (-x1 * x2 * c * c - 1.0) / c, c, -x1 * c;
  return m;
}

std::vector<Eigen::Matrix2d> schottky_generators() {
  return {circle_pairing(-1.0, 1.0, 0.5), circle_pairing(-4.0, 4.0, 1.0)};
}

MetricModel schottky_model() { return MetricModel::schottky(schottky_generators()); }

LengthSpectrum exact_schottky_spectrum(int max_word_length) {
  const auto gens = schottky_generators();
  const double horizon = completeness_horizon(schottky_model(), max_word_length);
  LengthSpectrum spec(horizon);
  for (const auto& w : enumerate_classes(gens, max_word_length, true)) {
    const double l = exact_length(w, gens);
    if (l <= horizon) spec.insert(make_entry(w, l, 1, 2.0 * std::sinh(0.5 * l)));
  }
  return spec;
}

LengthSpectrum single_primitive_spectrum(double l) {
  LengthSpectrum spec(4.0 * l);
  spec.insert(make_entry(Word::parse("a"), l, 1, 2.0 * std::sinh(0.5 * l)));
  return spec;
}

namespace {

long target_count(double h, double T) {
  return std::lround(std::exp(h * T) / (h * T));
}

// distinct label for the n-th synthetic orbit: n + 1 in binary over {a, b}
Word synthetic_word(long n) {
  std::vector<Word::Letter> letters;
  for (unsigned long x = static_cast<unsigned long>(n) + 1; x > 0; x >>= 1) {
    letters.push_back(generator_letter(static_cast<int>(x & 1u)));
  }
  return Word(std::move(letters));
}

}  // namespace

LengthSpectrum synthetic_pot_spectrum(double h, double T_max) {
  LengthSpectrum spec(T_max);
  const double T0 = 2.0 / h;
  long placed = 0;
  auto add = [&](double l) {
    spec.insert(make_entry(synthetic_word(placed), l, 1, 2.0 * std::sinh(0.5 * l)));
    ++placed;
  };
  while (placed < target_count(h, T0)) add(T0);
  for (long n = placed + 1; n <= target_count(h, T_max); ++n) {
    // smallest T with target_count(T) >= n; the count is increasing past T0
    double lo = T0;
    double hi = T_max;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (target_count(h, mid) >= n ? hi : lo) = mid;
    }
    add(hi);
  }
  return spec;
}

std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("lenspec_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace lenspec::testing
