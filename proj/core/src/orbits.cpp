#include "lenspec/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "lenspec/errors.hpp"
#include "lenspec/schottky.hpp"

namespace lenspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

ChartPoint displaced(const MetricModel& model, const ChartPoint& p, const Eigen::Vector2d& d) {
  const Eigen::Matrix2d E = orthonormal_frame(metric_at(model, p));
  return ChartPoint::from(p.coords() + E * d, p.chart);
}

Loop subdivided(const MetricModel& model, const Loop& loop) {
  Loop out;
  out.word = loop.word;
  const std::size_t n = loop.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ChartPoint& next = i + 1 < n ? loop.vertices[i + 1] : closing_vertex(model, loop);
    out.vertices.push_back(loop.vertices[i]);
    out.vertices.push_back(geodesic_midpoint(model, loop.vertices[i], next));
  }
  out.length = polyline_length(model, out);
  return out;
}

// Position and angle mismatch of `end` against `target`, in the orthonormal
// frame at the target.
Eigen::Vector3d mismatch(const MetricModel& model, const PhasePoint& end, const PhasePoint& target) {
  const Eigen::Matrix2d Einv = orthonormal_frame(metric_at(model, target.base)).inverse();
  const Eigen::Vector2d dp = Einv * (end.base.coords() - target.base.coords());
  const Eigen::Vector2d ve = Einv * end.velocity;
  const Eigen::Vector2d vt = Einv * target.velocity;
  return {dp[0], dp[1], wrap_angle(std::atan2(ve[1], ve[0]) - std::atan2(vt[1], vt[0]))};
}

// Shooting nodes are kept in the reduced domain. Segment j ends near the
// image of node j + 1 under the link word links[j], which keeps every
// comparison at moderate chart scale however long the orbit is.
class Shooting {
 public:
  Shooting(const MetricModel& model, std::vector<Word> links, double flow_tol)
      : model_(model), links_(std::move(links)), flow_tol_(flow_tol) {}

  PhasePoint start(const ChartPoint& p, double alpha) const {
    return unit_phase_point(model_, p, alpha);
  }

  PhasePoint flow(const PhasePoint& xi, double t) const {
    return integrate_geodesic(model_, xi, t, flow_tol_);
  }

  // target of segment j given the start of the following node
  PhasePoint target(std::size_t j, const PhasePoint& next_start) const {
    return links_[j].empty() ? next_start : model_.deck(links_[j], next_start);
  }

  const MetricModel& model() const { return model_; }

 private:
  const MetricModel& model_;
  std::vector<Word> links_;
  double flow_tol_;
};

double max_abs(const Eigen::VectorXd& r, Eigen::Index n) {
  return r.head(n).cwiseAbs().maxCoeff();
}

}  // namespace

Loop shorten_loop(const MetricModel& model, const Loop& loop, int max_iters, double tol,
                  std::vector<double>* history) {
  if (loop.word.empty()) throw ContractibleClassError("loop has the trivial homotopy class");
  if (loop.vertices.size() < 8) throw ConfigError("curve shortening needs at least 8 vertices");
  Loop out = loop;
  auto& V = out.vertices;
  const std::size_t n = V.size();
  const Word inv = loop.word.inverse();
  const double floor_length = 0.1 * model.injectivity_radius_lower_bound();

  double len = polyline_length(model, out);
  if (len < floor_length) throw ContractibleClassError("loop length is below 0.1 inj");
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t parity : {1u, 0u}) {
      for (std::size_t i = parity; i < n; i += 2) {
        const ChartPoint prev = i == 0 ? model.deck(inv, V[n - 1]) : V[i - 1];
        const ChartPoint next = i + 1 == n ? model.deck(loop.word, V[0]) : V[i + 1];
        V[i] = geodesic_midpoint(model, prev, next);
      }
    }
    const double next_len = polyline_length(model, out);
    if (history) history->push_back(next_len);
    if (next_len < floor_length) {
      throw ContractibleClassError("loop shrank below 0.1 inj: class " + loop.word.str() +
                                   " looks contractible");
    }
    const bool stationary = len - next_len <= tol;
    len = next_len;
    if (stationary) break;
  }
  out.length = len;
  return out;
}

ClosedGeodesic refine_newton(const MetricModel& model, const Loop& loop, double tol,
                             const NewtonOptions& options) {
  if (loop.word.empty()) throw ContractibleClassError("loop has the trivial homotopy class");
  if (loop.vertices.empty()) throw ConfigError("loop has no vertices");

  // initial nodes equally spaced in arc length along the polyline
  const std::size_t nv = loop.vertices.size();
  std::vector<Segment> segs;
  double total = 0.0;
  for (std::size_t i = 0; i < nv; ++i) {
    const ChartPoint& next = i + 1 < nv ? loop.vertices[i + 1] : closing_vertex(model, loop);
    segs.push_back(connect(model, loop.vertices[i], next));
    total += segs.back().length;
  }
  if (!(total > 0.0)) throw DegenerateOrbitError("loop has zero length");
  const std::size_t m =
      std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(options.nodes_per_unit * total)));
  std::vector<ChartPoint> P(m);
  std::vector<double> A(m);
  std::vector<Word> reducers(m);
  double tau = total / static_cast<double>(m);
  {
    std::size_t i = 0;
    double cum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double s = tau * static_cast<double>(j);
      while (i + 1 < nv && cum + segs[i].length < s) cum += segs[i++].length;
      const double frac = segs[i].length > 0.0 ? (s - cum) / segs[i].length : 0.0;
      // the direction comes from the segment even where it starts at the node
      const PhasePoint e = frac > 0.0
                               ? exp_map(model, loop.vertices[i], frac * segs[i].initial_velocity)
                               : PhasePoint{loop.vertices[i], segs[i].initial_velocity};
      const auto [reduced, g] = model.locate(e);
      P[j] = reduced.base;
      A[j] = frame_angle(model, reduced);
      reducers[j] = g;
    }
  }
  // lifted node j = deck(reducers[j]^-1, node j)
  std::vector<Word> links(m);
  for (std::size_t j = 0; j + 1 < m; ++j) links[j] = reducers[j] * reducers[j + 1].inverse();
  links[m - 1] = reducers[m - 1] * loop.word * reducers[0].inverse();
  const Shooting shoot(model, links, options.flow_tol);

  const Eigen::Index n3 = static_cast<Eigen::Index>(3 * m);
  auto evaluate = [&](const std::vector<ChartPoint>& Pc, const std::vector<double>& Ac, double t,
                      std::vector<PhasePoint>* starts, std::vector<PhasePoint>* ends) {
    std::vector<PhasePoint> st(m), en(m);
    for (std::size_t j = 0; j < m; ++j) st[j] = shoot.start(Pc[j], Ac[j]);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n3 + 1);
    for (std::size_t j = 0; j < m; ++j) {
      en[j] = shoot.flow(st[j], t);
      r.segment<3>(static_cast<Eigen::Index>(3 * j)) =
          mismatch(model, en[j], shoot.target(j, st[(j + 1) % m]));
    }
    if (starts) *starts = std::move(st);
    if (ends) *ends = std::move(en);
    return r;
  };

  std::vector<PhasePoint> starts, ends;
  Eigen::VectorXd r = evaluate(P, A, tau, &starts, &ends);
  double res = max_abs(r, n3);
  const double h = 1e-6;
  int iter = 0;
  for (; res > tol; ++iter) {
    if (iter >= options.max_iterations) {
      throw NonConvergenceError("Newton refinement of " + loop.word.str() + " did not converge",
                                res);
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n3 + 1, n3 + 1);
    auto perturbed_start = [&](std::size_t j, int q, double step) {
      if (q == 2) return shoot.start(P[j], A[j] + step);
      Eigen::Vector2d d = Eigen::Vector2d::Zero();
      d[q] = step;
      return shoot.start(displaced(model, P[j], d), A[j]);
    };
    for (std::size_t j = 0; j < m; ++j) {
      const Eigen::Index row = static_cast<Eigen::Index>(3 * j);
      const std::size_t nj = (j + 1) % m;
      const PhasePoint tgt = shoot.target(j, starts[nj]);
      for (int q = 0; q < 3; ++q) {
        // dependence through the segment end
        const PhasePoint ep = shoot.flow(perturbed_start(j, q, h), tau);
        const PhasePoint em = shoot.flow(perturbed_start(j, q, -h), tau);
        J.block<3, 1>(row, row + q) += (mismatch(model, ep, tgt) - mismatch(model, em, tgt)) / (2 * h);
        // dependence through the target
        const PhasePoint tp = shoot.target(j, perturbed_start(nj, q, h));
        const PhasePoint tm = shoot.target(j, perturbed_start(nj, q, -h));
        J.block<3, 1>(row, static_cast<Eigen::Index>(3 * nj) + q) +=
            (mismatch(model, ends[j], tp) - mismatch(model, ends[j], tm)) / (2 * h);
      }
      const PhasePoint ep = shoot.flow(ends[j], h);
      const PhasePoint em = shoot.flow(ends[j], -h);
      J.block<3, 1>(row, n3) = (mismatch(model, ep, tgt) - mismatch(model, em, tgt)) / (2 * h);
    }
    // phase condition: no displacement of the first node along the flow
    J(n3, 0) = std::cos(A[0]);
    J(n3, 1) = std::sin(A[0]);

    const Eigen::VectorXd step = J.partialPivLu().solve(-r);
    if (!step.allFinite()) {
      throw NonConvergenceError("singular Newton system for " + loop.word.str(), res);
    }
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12 && !accepted; ++k, lambda *= 0.5) {
      std::vector<ChartPoint> Pn(m);
      std::vector<double> An(m);
      try {
        for (std::size_t j = 0; j < m; ++j) {
          const Eigen::Index b = static_cast<Eigen::Index>(3 * j);
          Pn[j] = displaced(model, P[j], lambda * step.segment<2>(b));
          An[j] = A[j] + lambda * step[b + 2];
        }
        const double tn = tau + lambda * step[n3];
        if (!(tn > 0.0)) continue;
        std::vector<PhasePoint> sn, en;
        const Eigen::VectorXd rn = evaluate(Pn, An, tn, &sn, &en);
        const double resn = max_abs(rn, n3);
        if (resn < res || k == 11) {
          P = std::move(Pn);
          A = std::move(An);
          tau = tn;
          r = rn;
          res = resn;
          starts = std::move(sn);
          ends = std::move(en);
          accepted = true;
        }
      } catch (const DomainError&) {
      } catch (const ChartError&) {
      }
    }
    if (!accepted) {
      throw NonConvergenceError("Newton line search failed for " + loop.word.str(), res);
    }
  }

  ClosedGeodesic out;
  out.word = loop.word;
  out.length = tau * static_cast<double>(m);
  out.residual = res;
  for (std::size_t j = 0; j < m; ++j) {
    out.nodes.push_back(reducers[j].empty() ? starts[j]
                                            : model.deck(reducers[j].inverse(), starts[j]));
  }
  out.loop.word = loop.word;
  out.loop.length = out.length;
  for (const auto& s : out.nodes) out.loop.vertices.push_back(s.base);
  Monodromy mono;
  for (std::size_t j = 0; j < m; ++j) {
    const JacobiFlow jf = integrate_jacobi_flow(model, starts[j], tau, options.flow_tol);
    for (const auto& f : jf.monodromy.factors) {
      mono.factors.push_back(f);
      mono.matrix = f * mono.matrix;
    }
  }
  mono.base_length = out.length;
  mono.update_eigenvalues();
  const double lu = std::abs(mono.eigenvalues[0]);
  if (!std::isfinite(lu) || std::abs(lu - 1.0) < 1e-6) {
    throw DegenerateOrbitError("orbit " + loop.word.str() + " is not hyperbolic");
  }
  out.monodromy = mono;
  out.eigenvalues = mono.eigenvalues;
  return out;
}

Monodromy poincare_map(const MetricModel& model, const ClosedGeodesic& orbit, int k, double tol) {
  if (k < 1) throw ConfigError("Poincare map iterate must be >= 1");
  if (orbit.nodes.empty()) throw DataError("orbit has no phase data");
  Monodromy out;
  for (int rep = 0; rep < k; ++rep) {
    const JacobiFlow jf = integrate_jacobi_flow(model, orbit.start(), orbit.length, tol);
    for (const auto& f : jf.monodromy.factors) out.factors.push_back(f);
    out.matrix = jf.monodromy.matrix * out.matrix;
  }
  out.base_length = orbit.length * k;
  out.update_eigenvalues();
  return out;
}

double det_weight(const Monodromy& m, int k) {
  if (k < 1) throw ConfigError("iterate index must be >= 1");
  const double lu = std::abs(m.eigenvalues[0]);
  if (!std::isfinite(lu) || std::abs(lu - 1.0) < 1e-6) {
    throw DegenerateOrbitError("monodromy eigenvalue on the unit circle");
  }
  return 2.0 * std::sinh(0.5 * k * std::abs(std::log(lu)));
}

OrbitSearchOptions OrbitSearchOptions::for_model(const MetricModel& model) {
  OrbitSearchOptions o;
  if (!model.is_constant_curvature()) {
    o.vertices_per_unit = 8;
    o.max_doublings = 0;
    o.shorten_iters = 30;
  }
  return o;
}

ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Word& w) {
  return find_closed_geodesic(model, w, OrbitSearchOptions::for_model(model));
}

ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Loop& seed,
                                    const OrbitSearchOptions& options) {
  Loop cur = shorten_loop(model, seed, options.shorten_iters, options.shorten_tol);
  for (int d = 0; d < options.max_doublings; ++d) {
    Loop fine = shorten_loop(model, subdivided(model, cur), options.shorten_iters,
                             options.shorten_tol);
    const bool settled = std::abs(fine.length - cur.length) < options.doubling_tol;
    cur = std::move(fine);
    if (settled) break;
  }
  return refine_newton(model, cur, options.newton_tol, options.newton);
}

ClosedGeodesic find_closed_geodesic(const MetricModel& model, const Word& w,
                                    const OrbitSearchOptions& options) {
  const MetricModel& base = model.unperturbed();
  double guess = 0.0;
  if (base.kind() == ModelKind::cylinder) {
    guess = base.core_length() * static_cast<double>(w.size());
  } else if (base.rank() > 0 && !w.empty()) {
    guess = exact_length(w, base.generators());
  }
  const int n = std::max(8, static_cast<int>(std::ceil(options.vertices_per_unit * guess)));
  return find_closed_geodesic(model, seed_loop(w, model, n), options);
}

}  // namespace lenspec
