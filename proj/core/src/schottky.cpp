#include "lenspec/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lenspec/errors.hpp"
#include "lenspec/hyperbolic.hpp"

namespace lenspec {

namespace {

[[noreturn]] void fail(const std::string& why) {
  throw ConfigError("Schottky validation failed: " + why);
}

}  // namespace

std::vector<IsometricCircle> isometric_circles(const std::vector<Eigen::Matrix2d>& generators) {
  std::vector<IsometricCircle> out;
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const Eigen::Matrix2d& g = generators[k];
    const double c = g(1, 0);
    if (c == 0.0) continue;
    const double r = 1.0 / std::abs(c);
    out.push_back({-g(1, 1) / c, r, generator_letter(static_cast<int>(k))});
    out.push_back({g(0, 0) / c, r, inverse_letter(generator_letter(static_cast<int>(k)))});
  }
  return out;
}

void validate_schottky(const std::vector<Eigen::Matrix2d>& generators) {
  if (generators.empty()) fail("no generators");
  if (generators.size() > 26) fail("at most 26 generators are supported");
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const Eigen::Matrix2d& g = generators[k];
    const std::string name = "generator " + std::to_string(k);
    if (!g.allFinite()) fail(name + " has non-finite entries");
    if (std::abs(g.determinant() - 1.0) > 1e-12) fail(name + " does not have determinant 1");
    if (!(std::abs(g.trace()) > 2.0)) fail(name + " is not hyperbolic");
    if (g(1, 0) == 0.0 && generators.size() > 1) {
      fail(name + " fixes infinity; only allowed for a single generator");
    }
  }
  const auto circles = isometric_circles(generators);
  for (std::size_t i = 0; i < circles.size(); ++i) {
    for (std::size_t j = i + 1; j < circles.size(); ++j) {
      const double gap = std::abs(circles[i].center - circles[j].center) - circles[i].radius -
                         circles[j].radius;
      if (!(gap > kSchottkyMargin)) fail("isometric circles intersect");
    }
  }
}

Eigen::Matrix2d letter_matrix(const std::vector<Eigen::Matrix2d>& generators, Word::Letter x) {
  const std::size_t k = x / 2u;
  if (k >= generators.size()) {
    throw ConfigError("letter refers to generator " + std::to_string(k) + " of " +
                      std::to_string(generators.size()));
  }
  const Eigen::Matrix2d& g = generators[k];
  if ((x & 1u) == 0u) return g;
  Eigen::Matrix2d inv;
  inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
  return inv;
}

Eigen::Matrix2d word_matrix(const Word& w, const std::vector<Eigen::Matrix2d>& generators) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (Word::Letter x : w.letters()) m = m * letter_matrix(generators, x);
  return m;
}

double circle_separation(const std::vector<Eigen::Matrix2d>& generators) {
  const auto circles = isometric_circles(generators);
  if (circles.size() < 2) return hyperbolic::translation_length(generators.at(0));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < circles.size(); ++i) {
    for (std::size_t j = i + 1; j < circles.size(); ++j) {
      const IsometricCircle* l = &circles[i];
      const IsometricCircle* r = &circles[j];
      if (l->center > r->center) std::swap(l, r);
      best = std::min(best, hyperbolic::distance_between_geodesics(
                                l->center - l->radius, l->center + l->radius,
                                r->center - r->radius, r->center + r->radius));
    }
  }
  return best;
}

double exact_length(const Word& w, const std::vector<Eigen::Matrix2d>& generators) {
  if (w.empty()) throw ContractibleClassError("the empty word has no closed geodesic");
  return hyperbolic::translation_length(word_matrix(w, generators));
}

std::vector<Word> enumerate_classes(int rank, int max_word_length, bool unoriented) {
  if (max_word_length < 1) throw ConfigError("max_word_length must be >= 1");
  if (rank < 1) return {};
  std::vector<Word> out;
  const int letters = 2 * rank;
  std::vector<Word::Letter> cur;
  // depth-first over freely reduced words
  auto visit = [&](auto&& self) -> void {
    if (!cur.empty()) {
      const Word w(cur);
      if (w.is_cyclically_reduced() && w.is_primitive() && w.canonical(unoriented) == w) {
        out.push_back(w);
      }
    }
    if (static_cast<int>(cur.size()) == max_word_length) return;
    for (int x = 0; x < letters; ++x) {
      const auto letter = static_cast<Word::Letter>(x);
      if (!cur.empty() && cur.back() == inverse_letter(letter)) continue;
      cur.push_back(letter);
      self(self);
      cur.pop_back();
    }
  };
  visit(visit);
  std::sort(out.begin(), out.end(), [](const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

std::vector<Word> enumerate_classes(const std::vector<Eigen::Matrix2d>& generators,
                                    int max_word_length, bool unoriented) {
  validate_schottky(generators);
  return enumerate_classes(static_cast<int>(generators.size()), max_word_length, unoriented);
}

double completeness_horizon(const MetricModel& model, int max_word_length) {
  if (max_word_length < 1) throw ConfigError("max_word_length must be >= 1");
  const MetricModel& base = model.unperturbed();
  if (base.rank() == 0) return std::numeric_limits<double>::infinity();
  const double step = base.kind() == ModelKind::cylinder
                          ? base.core_length()
                          : (base.rank() == 1 ? hyperbolic::translation_length(base.generators()[0])
                                              : circle_separation(base.generators()));
  const double words = max_word_length + 1.0;
  double horizon = words * step * (1.0 - 1e-12);
  if (model.kind() == ModelKind::perturbed) {
    const double a = std::abs(model.bump().amplitude);
    horizon = std::min(horizon * std::exp(-a), horizon - 2.0 * a * words);
  }
  return horizon;
}

Loop seed_loop(const Word& w, const std::vector<Eigen::Matrix2d>& generators,
               const MetricModel& model, int vertices) {
  if (w.empty()) throw ContractibleClassError("the empty word is contractible");
  if (w.max_generator() >= model.rank()) {
    throw ConfigError("word " + w.str() + " uses a generator the model does not have");
  }
  auto vertex_count = [&](double length) {
    int n = vertices > 0 ? vertices : std::max(8, static_cast<int>(std::ceil(32.0 * length)));
    return n + (n % 2);
  };
  Loop loop;
  loop.word = w;
  if (model.chart() == ChartId::cylinder) {
    long net = 0;
    for (Word::Letter x : w.letters()) net += (x & 1u) ? -1 : 1;
    if (net == 0) throw ContractibleClassError("word " + w.str() + " is contractible");
    const double ell = model.core_length();
    const int n = vertex_count(std::abs(static_cast<double>(net)) * ell);
    for (int j = 0; j < n; ++j) {
      loop.vertices.push_back({0.0, 2.0 * std::numbers::pi * static_cast<double>(net) * j / n,
                               ChartId::cylinder});
    }
  } else {
    const Eigen::Matrix2d m = word_matrix(w, generators);
    const hyperbolic::Geodesic ax = hyperbolic::axis(m);
    const hyperbolic::Complex p0 = ax.vertical ? hyperbolic::Complex(ax.center, 1.0)
                                               : hyperbolic::Complex(ax.center, ax.radius);
    const auto dir = hyperbolic::direction(p0, hyperbolic::mobius(m, p0));
    const int n = vertex_count(dir.distance);
    for (int j = 0; j < n; ++j) {
      const auto z = hyperbolic::exp(p0, dir.tangent * (dir.distance * j / n)).first;
      loop.vertices.push_back(model.from_hyperbolic(z));
    }
  }
  loop.length = polyline_length(model, loop);
  return loop;
}

Loop seed_loop(const Word& w, const MetricModel& model, int vertices) {
  return seed_loop(w, model.generators(), model, vertices);
}

ChartPoint closing_vertex(const MetricModel& model, const Loop& loop) {
  return model.deck(loop.word, loop.vertices.at(0));
}

double polyline_length(const MetricModel& model, const Loop& loop) {
  const std::size_t n = loop.vertices.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ChartPoint& next = i + 1 < n ? loop.vertices[i + 1] : closing_vertex(model, loop);
    total += geodesic_distance(model, loop.vertices[i], next);
  }
  return total;
}

}  // namespace lenspec
