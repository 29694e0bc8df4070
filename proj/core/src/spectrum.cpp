#include "lenspec/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lenspec/errors.hpp"

namespace lenspec {

std::string CountingConvention::str() const {
  std::string s = multiplicity == Multiplicity::primitive ? "primitive" : "with_iterates";
  s += orientation == Orientation::oriented ? "_oriented" : "_unoriented";
  return s;
}

CountingConvention CountingConvention::parse(std::string_view text) {
  for (auto m : {Multiplicity::primitive, Multiplicity::with_iterates}) {
    for (auto o : {Orientation::unoriented, Orientation::oriented}) {
      const CountingConvention c{m, o};
      if (c.str() == text) return c;
    }
  }
  throw ConfigError("unknown counting convention \"" + std::string(text) +
                    "\" (expected primitive_unoriented, primitive_oriented, "
                    "with_iterates_unoriented or with_iterates_oriented)");
}

SpectrumEntry make_entry(const Word& w, double primitive_length, int k, double weight,
                         double residual, bool oriented) {
  SpectrumEntry e;
  e.word = w;
  e.primitive_length = primitive_length;
  e.k = k;
  e.total_length = k * primitive_length;
  e.weight = weight;
  e.residual = residual;
  e.oriented = oriented;
  return e;
}

namespace {

bool entry_less(const SpectrumEntry& a, const SpectrumEntry& b) {
  if (a.total_length != b.total_length) return a.total_length < b.total_length;
  if (a.word != b.word) return a.word < b.word;
  return a.k < b.k;
}

}  // namespace

LengthSpectrum::LengthSpectrum(double max_length, CountingConvention convention,
                               double dedupe_tolerance)
    : max_length_(max_length), convention_(convention), dedupe_tolerance_(dedupe_tolerance) {}

void LengthSpectrum::insert(const SpectrumEntry& e) {
  auto same = std::find_if(entries_.begin(), entries_.end(), [&](const SpectrumEntry& x) {
    return x.k == e.k && x.word == e.word;
  });
  if (same != entries_.end()) {
    // ties are broken on the row itself so that merging is order independent
    const bool better = e.residual < same->residual ||
                        (e.residual == same->residual && e.primitive_length < same->primitive_length);
    if (!better) return;
    entries_.erase(same);
  }
  entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), e, entry_less), e);
}

void LengthSpectrum::merge(const LengthSpectrum& other) {
  for (const auto& e : other.entries_) insert(e);
  max_length_ = std::min(max_length_, other.max_length_);
}

std::vector<SpectrumEntry> LengthSpectrum::primitives() const {
  std::vector<SpectrumEntry> out;
  for (const auto& e : entries_) {
    if (e.k == 1) out.push_back(e);
  }
  return out;
}

const SpectrumEntry* LengthSpectrum::find(const Word& w, int k) const {
  for (const auto& e : entries_) {
    if (e.k == k && e.word == w) return &e;
  }
  return nullptr;
}

long LengthSpectrum::count(double T) const { return count(T, convention_); }

long LengthSpectrum::count(double T, CountingConvention convention) const {
  if (T > max_length_) {
    throw IncompleteHorizonError("N(" + format_real(T) + ") requested beyond the completeness horizon " +
                                 format_real(max_length_));
  }
  long n = 0;
  for (const auto& e : entries_) {
    if (e.k != 1 || e.primitive_length > T) continue;
    long mult = 1;
    if (convention.orientation == Orientation::oriented && !e.oriented) mult = 2;
    // an oriented entry and its inverse share one unoriented class
    if (convention.orientation == Orientation::unoriented && e.oriented &&
        e.word.canonical(true) != e.word.canonical(false)) {
      continue;
    }
    long iterates = 1;
    if (convention.multiplicity == Multiplicity::with_iterates) {
      iterates = static_cast<long>(std::floor(T / e.primitive_length));
      while ((iterates + 1) * e.primitive_length <= T) ++iterates;
      while (iterates > 1 && iterates * e.primitive_length > T) --iterates;
    }
    n += mult * iterates;
  }
  return n;
}

bool operator==(const SpectrumEntry& a, const SpectrumEntry& b) {
  auto same = [](double x, double y) { return x == y || (x != x && y != y); };
  return a.word == b.word && a.k == b.k && a.primitive_length == b.primitive_length &&
         a.total_length == b.total_length && same(a.weight, b.weight) && a.residual == b.residual &&
         a.oriented == b.oriented;
}

bool operator==(const LengthSpectrum& a, const LengthSpectrum& b) {
  return a.entries() == b.entries() && a.max_length() == b.max_length() &&
         a.convention() == b.convention() && a.dedupe_tolerance() == b.dedupe_tolerance() &&
         a.seed == b.seed && a.config_hash == b.config_hash;
}

LengthSpectrum truncated(const LengthSpectrum& spec, double T) {
  if (T > spec.max_length()) {
    throw IncompleteHorizonError("cannot truncate beyond the completeness horizon");
  }
  LengthSpectrum out(T, spec.convention(), spec.dedupe_tolerance());
  out.seed = spec.seed;
  out.config_hash = spec.config_hash;
  for (const auto& e : spec.entries()) {
    if (e.total_length <= T) out.insert(e);
  }
  return out;
}

double iterate_weight(double primitive_weight, int k) {
  return 2.0 * std::sinh(k * std::asinh(0.5 * primitive_weight));
}

void expand_iterates(LengthSpectrum& spec) {
  if (!std::isfinite(spec.max_length())) {
    throw IncompleteHorizonError("cannot expand iterates without a finite horizon");
  }
  for (const auto& p : spec.primitives()) {
    for (int k = 2; k * p.primitive_length <= spec.max_length(); ++k) {
      if (spec.find(p.word, k)) continue;
      const double w = p.has_weight() ? iterate_weight(p.weight, k) : p.weight;
      spec.insert(make_entry(p.word, p.primitive_length, k, w, p.residual, p.oriented));
    }
  }
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

constexpr std::string_view kHeader = "word,primitive_length,k,total_length,weight,residual";

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool all_oriented(const LengthSpectrum& spec) {
  return !spec.empty() && std::all_of(spec.entries().begin(), spec.entries().end(),
                                      [](const SpectrumEntry& e) { return e.oriented; });
}

double parse_real(std::string_view field, int line, const char* name) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(std::string("invalid ") + name + " \"" + std::string(field) + "\"", line);
  }
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string to_csv(const LengthSpectrum& spec, const SaveOptions& options) {
  std::ostringstream out;
  out << "# lenspec length spectrum\n";
  if (options.timestamp) out << "# generated=" << timestamp_utc() << "\n";
  out << "# seed=" << spec.seed << "\n";
  out << "# config_hash=" << spec.config_hash << "\n";
  out << "# horizon=" << format_real(spec.max_length()) << "\n";
  out << "# convention=" << spec.convention().str() << "\n";
  out << "# classes=" << (all_oriented(spec) ? "oriented" : "unoriented") << "\n";
  out << "# dedupe_tolerance=" << format_real(spec.dedupe_tolerance()) << "\n";
  out << kHeader << "\n";
  for (const auto& e : spec.entries()) {
    out << e.word.str() << ',' << format_real(e.primitive_length) << ',' << e.k << ','
        << format_real(e.total_length) << ',' << (e.has_weight() ? format_real(e.weight) : "")
        << ',' << format_real(e.residual) << "\n";
  }
  return out.str();
}

void save(const LengthSpectrum& spec, const std::string& path, const SaveOptions& options) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << to_csv(spec, options);
  if (!f) throw DataError("failed writing " + path);
}

LengthSpectrum from_csv(std::string_view text) {
  double horizon = std::numeric_limits<double>::infinity();
  CountingConvention convention;
  double dedupe = 1e-6;
  bool oriented = false;
  std::uint64_t seed = 0;
  std::string hash;
  bool header_seen = false;
  std::vector<SpectrumEntry> rows;

  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = line.substr(1);
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = body.substr(0, eq);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      const std::string_view value = body.substr(eq + 1);
      try {
        if (key == "horizon") {
          horizon = parse_real(value, line_no, "horizon");
        } else if (key == "convention") {
          convention = CountingConvention::parse(value);
        } else if (key == "dedupe_tolerance") {
          dedupe = parse_real(value, line_no, "dedupe tolerance");
        } else if (key == "classes") {
          if (value != "oriented" && value != "unoriented") {
            throw ParseError("classes must be oriented or unoriented", line_no);
          }
          oriented = value == "oriented";
        } else if (key == "seed") {
          const auto res = std::from_chars(value.data(), value.data() + value.size(), seed);
          if (res.ec != std::errc()) throw ParseError("invalid seed", line_no);
        } else if (key == "config_hash") {
          hash = std::string(value);
        }
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) {
        throw ParseError("expected header \"" + std::string(kHeader) + "\"", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6) {
      throw ParseError("expected 6 fields, found " + std::to_string(f.size()), line_no);
    }
    SpectrumEntry e;
    try {
      e.word = Word::parse(f[0]);
    } catch (const DataError& err) {
      throw ParseError(err.what(), line_no);
    }
    if (e.word.empty()) throw ParseError("empty word", line_no);
    e.primitive_length = parse_real(f[1], line_no, "primitive_length");
    const auto kres = std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.k);
    if (kres.ec != std::errc() || kres.ptr != f[2].data() + f[2].size() || e.k < 1) {
      throw ParseError("iterate index must be a positive integer", line_no);
    }
    e.total_length = parse_real(f[3], line_no, "total_length");
    e.weight = f[4].empty() ? std::numeric_limits<double>::quiet_NaN()
                            : parse_real(f[4], line_no, "weight");
    e.residual = parse_real(f[5], line_no, "residual");
    e.oriented = oriented;
    if (!(e.primitive_length > 0.0) || !std::isfinite(e.primitive_length)) {
      throw ParseError("primitive_length must be positive", line_no);
    }
    if (std::abs(e.total_length - e.k * e.primitive_length) > 1e-12 * std::max(1.0, e.total_length)) {
      throw ParseError("total_length differs from k * primitive_length", line_no);
    }
    if (!f[4].empty() && !(e.weight > 0.0)) throw ParseError("weight must be positive", line_no);
    if (!(e.residual >= 0.0)) throw ParseError("residual must be non-negative", line_no);
    rows.push_back(std::move(e));
  }
  if (!header_seen) throw ParseError("missing header line", line_no);

  LengthSpectrum spec(horizon, convention, dedupe);
  spec.seed = seed;
  spec.config_hash = hash;
  for (const auto& e : rows) spec.insert(e);
  return spec;
}

LengthSpectrum load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_csv(buf.str());
}

}  // namespace lenspec
