#pragma once

// Length spectrum storage: closed-geodesic records keyed by (word, iterate),
// counting functions under an explicit convention, and CSV persistence.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lenspec/word.hpp"

namespace lenspec {

enum class Multiplicity { primitive, with_iterates };
enum class Orientation { unoriented, oriented };

struct CountingConvention {
  Multiplicity multiplicity = Multiplicity::primitive;
  Orientation orientation = Orientation::unoriented;

  // "primitive_unoriented", "with_iterates_oriented", ...
  std::string str() const;
  static CountingConvention parse(std::string_view text);
  bool operator==(const CountingConvention&) const = default;
};

struct SpectrumEntry {
  Word word;
  double primitive_length = 0.0;
  int k = 1;
  double total_length = 0.0;
  // sqrt|det(I - P^k)|; NaN when unknown
  double weight = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  // false: the entry stands for both w and its inverse
  bool oriented = false;

  bool has_weight() const { return weight == weight; }
};

SpectrumEntry make_entry(const Word& w, double primitive_length, int k, double weight,
                         double residual = 0.0, bool oriented = false);

class LengthSpectrum {
 public:
  explicit LengthSpectrum(double max_length = std::numeric_limits<double>::infinity(),
                          CountingConvention convention = {}, double dedupe_tolerance = 1e-6);

  // Sorted insert. An entry with the same (word, k) is replaced only when the
  // new residual is smaller.
  void insert(const SpectrumEntry& e);
  // Order-independent union; the horizon becomes the smaller of the two.
  void merge(const LengthSpectrum& other);

  const std::vector<SpectrumEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // entries with k == 1
  std::vector<SpectrumEntry> primitives() const;
  const SpectrumEntry* find(const Word& w, int k) const;

  // N(T) under the spectrum's own convention or an explicit one. Iterates are
  // counted from the primitive entries, so stored iterate rows are optional.
  // Throws IncompleteHorizonError for T beyond max_length.
  long count(double T) const;
  long count(double T, CountingConvention convention) const;

  double max_length() const { return max_length_; }
  void set_max_length(double T) { max_length_ = T; }
  CountingConvention convention() const { return convention_; }
  void set_convention(CountingConvention c) { convention_ = c; }
  double dedupe_tolerance() const { return dedupe_tolerance_; }

  std::uint64_t seed = 0;
  std::string config_hash;

 private:
  std::vector<SpectrumEntry> entries_;
  double max_length_;
  CountingConvention convention_;
  double dedupe_tolerance_;
};

bool operator==(const SpectrumEntry& a, const SpectrumEntry& b);
bool operator==(const LengthSpectrum& a, const LengthSpectrum& b);

// Adds the iterate rows k >= 2 of every primitive up to the horizon, with
// weights derived from the primitive weight.
void expand_iterates(LengthSpectrum& spec);

// Copy keeping the entries with total_length <= T, with horizon T.
LengthSpectrum truncated(const LengthSpectrum& spec, double T);

// Weight of the k-th iterate given the primitive weight 2 sinh(L/2).
double iterate_weight(double primitive_weight, int k);

struct SaveOptions {
  // Writes the "# generated=" line; the only line that differs between runs.
  bool timestamp = true;
};

void save(const LengthSpectrum& spec, const std::string& path, const SaveOptions& options = {});
std::string to_csv(const LengthSpectrum& spec, const SaveOptions& options = {});
LengthSpectrum load(const std::string& path);
LengthSpectrum from_csv(std::string_view text);

// Decimal text with 17 significant digits.
std::string format_real(double x);

}  // namespace lenspec
