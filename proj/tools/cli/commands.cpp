#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "lenspec/analysis.hpp"
#include "lenspec/errors.hpp"
#include "lenspec/orbits.hpp"
#include "lenspec/schottky.hpp"

namespace lenspec::cli {

namespace fs = std::filesystem;

namespace {

// JSON has no infinities; non-finite values are written as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

Json phase_json(const PhasePoint& xi) {
  return Json{{"u", xi.base.u}, {"v", xi.base.v}, {"du", xi.velocity[0]}, {"dv", xi.velocity[1]}};
}

Json matrix_json(const Eigen::Matrix2d& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

std::string model_kind(ModelKind k) {
  switch (k) {
    case ModelKind::half_plane:
      return "half_plane";
    case ModelKind::cylinder:
      return "cylinder";
    case ModelKind::schottky:
      return "schottky";
    case ModelKind::perturbed:
      return "perturbed";
  }
  return "unknown";
}

std::vector<Word> classes_for(const MetricModel& model, int max_word_length, bool unoriented) {
  const MetricModel& base = model.unperturbed();
  if (base.rank() == 0) return {};
  if (base.kind() == ModelKind::schottky) {
    return enumerate_classes(base.generators(), max_word_length, unoriented);
  }
  return enumerate_classes(base.rank(), max_word_length, unoriented);
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

Json record_header(const RunConfig& cfg, const LengthSpectrum& spec, const std::string& task) {
  return Json{{"task", task},
              {"config_hash", cfg.hash},
              {"seed", cfg.seed},
              {"spectrum_config_hash", spec.config_hash},
              {"horizon", number(spec.max_length())},
              {"convention", spec.convention().str()}};
}

std::optional<Window> window_from(const Json& section) {
  if (!section.is_object() || !section.contains("window")) return std::nullopt;
  const Json& w = section["window"];
  if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
    throw ConfigError("analysis window must be [lo, hi]");
  }
  return Window{w[0].get<double>(), w[1].get<double>()};
}

double number_or(const Json& section, const char* key, double fallback) {
  if (!section.is_object() || !section.contains(key)) return fallback;
  if (!section[key].is_number()) throw ConfigError(std::string("analysis field ") + key + " must be a number");
  return section[key].get<double>();
}

Potential potential_from(const Json& section) {
  const std::string name = section.value("potential", std::string("zero"));
  if (name == "zero") return Potential::zero();
  if (name == "srb_half") return Potential::srb_half();
  if (name == "constant") {
    if (!section.contains("c")) throw ConfigError("constant potential needs analysis.pressure.c");
    return Potential::constant(number_or(section, "c", 0.0));
  }
  throw ConfigError("unknown potential '" + name + "' (expected zero, constant or srb_half)");
}

std::vector<ClosedGeodesic> load_orbits(const std::string& path, ChartId chart) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open orbit sidecar " + path);
  const Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("orbits")) {
    throw DataError("orbit sidecar " + path + " is malformed");
  }
  std::vector<ClosedGeodesic> out;
  for (const auto& o : doc["orbits"]) {
    ClosedGeodesic g;
    g.word = Word::parse(o.at("word").get<std::string>());
    g.length = o.at("length").get<double>();
    g.residual = o.at("residual").get<double>();
    const Json& s = o.at("start");
    g.nodes.push_back(PhasePoint{{s.at("u").get<double>(), s.at("v").get<double>(), chart},
                                 {s.at("du").get<double>(), s.at("dv").get<double>()}});
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << format_real(e.residual()) << ")\n";
    return kExitNonConvergence;
  } catch (const IncompleteHorizonError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIncompleteHorizon;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_validate_model(const RunConfig& cfg, std::ostream& log) {
  const MetricModel model = build_model(cfg.model);
  log << "model=" << model_kind(model.kind()) << " rank=" << model.unperturbed().rank()
      << " injectivity_radius_bound=" << format_real(model.injectivity_radius_lower_bound())
      << "\n";
  if (model.unperturbed().rank() > 0) {
    log << "horizon=" << format_real(completeness_horizon(model, cfg.max_word_length))
        << " max_word_length=" << cfg.max_word_length << "\n";
  }
  if (model.kind() == ModelKind::perturbed) {
    const CurvatureBounds cb = curvature_bounds(model);
    log << "curvature k_min=" << format_real(cb.k_min) << " k_max=" << format_real(cb.k_max)
        << " k1=" << format_real(cb.k1) << " k2=" << format_real(cb.k2) << "\n";
  }
  log << "ok\n";
  return kExitOk;
}

int cmd_enumerate(const RunConfig& cfg, unsigned workers, std::ostream& log) {
  const MetricModel model = build_model(cfg.model);
  const bool unoriented = cfg.counting_convention.orientation == Orientation::unoriented;
  const std::vector<Word> words = classes_for(model, cfg.max_word_length, unoriented);
  const double horizon = model.unperturbed().rank() == 0
                             ? std::numeric_limits<double>::infinity()
                             : completeness_horizon(model, cfg.max_word_length);
  const OrbitSearchOptions options = search_options(model, cfg.tolerances);

  struct Outcome {
    std::optional<ClosedGeodesic> orbit;
    double weight = 0.0;
    std::string error;
    bool non_convergence = false;
  };
  std::vector<Outcome> results(words.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < words.size(); i = next++) {
      try {
        ClosedGeodesic g = find_closed_geodesic(model, words[i], options);
        results[i].weight = det_weight(g.monodromy, 1);
        results[i].orbit = std::move(g);
      } catch (const NonConvergenceError& e) {
        results[i].error = e.what();
        results[i].non_convergence = true;
      } catch (const Error& e) {
        results[i].error = e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, words.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  bool failed = false;
  bool other_failure = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (results[i].orbit) continue;
    failed = true;
    other_failure = other_failure || !results[i].non_convergence;
    log << "failed word=" << words[i].str() << ": " << results[i].error << "\n";
  }
  if (failed) return other_failure ? kExitFailure : kExitNonConvergence;

  LengthSpectrum spec(horizon, cfg.counting_convention, cfg.tolerances.dedupe);
  spec.seed = cfg.seed;
  spec.config_hash = cfg.hash;
  Json orbits = Json::array();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const ClosedGeodesic& g = *results[i].orbit;
    spec.insert(make_entry(g.word, g.length, 1, results[i].weight, g.residual, !unoriented));
    orbits.push_back(Json{{"word", g.word.str()},
                          {"length", g.length},
                          {"residual", g.residual},
                          {"weight", results[i].weight},
                          {"eigenvalues", Json::array({g.eigenvalues[0], g.eigenvalues[1]})},
                          {"monodromy", matrix_json(g.monodromy.matrix)},
                          {"start", phase_json(g.start())}});
  }
  const std::size_t primitives = spec.size();
  expand_iterates(spec);

  const fs::path dir = prepare_output(cfg);
  save(spec, (dir / "spectrum.csv").string());
  const Json sidecar{{"config_hash", cfg.hash},
                     {"seed", cfg.seed},
                     {"horizon", number(horizon)},
                     {"model", cfg.model},
                     {"orbits", orbits}};
  write_text(dir / "orbits.json", sidecar.dump(2) + "\n");
  log << "orbits=" << primitives << " horizon=" << format_real(horizon) << "\n";
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, const std::string& spectrum_path, const std::string& task,
                const std::string& orbits_path, std::ostream& log) {
  LengthSpectrum spec = load(spectrum_path);
  spec.set_convention(cfg.counting_convention);
  const Json& a = cfg.analysis;
  const Json section = a.contains(task) ? a[task] : Json::object();
  std::vector<Json> records;

  if (task == "zeta") {
    const int k_max = static_cast<int>(number_or(section, "k_max", 200));
    const bool weighted = section.value("weighted", false);
    auto to_complex = [](const Json& v) -> std::complex<double> {
      if (v.is_number()) return {v.get<double>(), 0.0};
      if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
      }
      throw ConfigError("zeta arguments must be numbers or [re, im] pairs");
    };
    // "s" is one argument, "s_values" a list of them
    std::vector<std::complex<double>> points;
    if (section.contains("s_values")) {
      if (!section["s_values"].is_array()) throw ConfigError("analysis.zeta.s_values must be a list");
      for (const auto& v : section["s_values"]) points.push_back(to_complex(v));
    } else {
      points.push_back(to_complex(section.contains("s") ? section["s"] : Json(1.0)));
    }
    for (const auto& z : points) {
      const ZetaValue zv = weighted ? weighted_zeta(spec, z, k_max) : zeta(spec, z, k_max);
      Json r = record_header(cfg, spec, task);
      r["weighted"] = weighted;
      r["s"] = Json::array({z.real(), z.imag()});
      r["k_max"] = k_max;
      r["value"] = Json::array({number(zv.value.real()), number(zv.value.imag())});
      r["log_value"] = Json::array({number(zv.log_value.real()), number(zv.log_value.imag())});
      r["truncation_T"] = number(zv.truncation_T);
      r["tail_bound"] = number(zv.tail_bound);
      r["tail_bound_kind"] = "heuristic";
      r["convergent"] = zv.convergent;
      r["abscissa"] = number(zv.abscissa);
      records.push_back(r);
    }
  } else if (task == "entropy") {
    const EntropyEstimate e = estimate_entropy(spec, window_from(section));
    Json r = record_header(cfg, spec, task);
    r["h"] = e.h;
    r["stderr"] = e.stderr_h;
    r["window"] = Json::array({e.window.lo, e.window.hi});
    r["steps"] = e.steps;
    r["vacuous"] = e.vacuous;
    records.push_back(r);
  } else if (task == "pressure") {
    const Potential pot = potential_from(section);
    const PressureEstimate p =
        estimate_pressure(spec, pot, window_from(section), number_or(section, "bin_width", 0.5));
    Json r = record_header(cfg, spec, task);
    r["potential"] = pot.str();
    r["p"] = p.p;
    r["stderr"] = p.stderr_p;
    r["window"] = Json::array({p.window.lo, p.window.hi});
    r["bin_width"] = p.bin_width;
    r["bins"] = p.bins;
    r["entropy_correction"] = p.entropy;
    records.push_back(r);
  } else if (task == "trace") {
    const TestFunction phi(number_or(section, "center", 2.0), number_or(section, "width", 1.0));
    Json r = record_header(cfg, spec, task);
    r["center"] = phi.center();
    r["width"] = phi.width();
    r["support"] = Json::array({phi.support_lo(), phi.support_hi()});
    r["value"] = dynamical_trace(spec, phi);
    records.push_back(r);
  } else if (task == "pot") {
    double h = number_or(section, "h", std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(h)) h = estimate_entropy(spec).h;
    std::vector<double> Ts;
    if (section.contains("T")) {
      for (const auto& t : section["T"]) Ts.push_back(t.get<double>());
    } else {
      const double H = spec.max_length();
      if (!std::isfinite(H)) throw ConfigError("pot on an infinite horizon needs analysis.pot.T");
      for (int i = 1; i <= 8; ++i) Ts.push_back(H * i / 8.0);
    }
    const PotTable table = pot_ratio(spec, h, Ts);
    Json r = record_header(cfg, spec, task);
    r["h"] = h;
    r["vacuous"] = table.vacuous;
    Json rows = Json::array();
    std::string csv = "# lenspec prime orbit ratios\n# seed=" + std::to_string(cfg.seed) +
                      "\n# config_hash=" + cfg.hash + "\n# h=" + format_real(h) +
                      "\n# vacuous=" + (table.vacuous ? "true" : "false") + "\nT,count,ratio\n";
    for (const auto& row : table.rows) {
      rows.push_back(Json{{"T", row.T}, {"count", row.count}, {"ratio", number(row.ratio)}});
      csv += format_real(row.T) + "," + std::to_string(row.count) + "," + format_real(row.ratio) + "\n";
    }
    r["rows"] = rows;
    records.push_back(r);
    write_text(prepare_output(cfg) / "pot_ratio.csv", csv);
  } else if (task == "separation") {
    const MetricModel model = build_model(cfg.model);
    const std::string path =
        orbits_path.empty() ? (fs::path(spectrum_path).parent_path() / "orbits.json").string()
                            : orbits_path;
    const auto orbits = load_orbits(path, model.chart());
    const double T = number_or(section, "T", spec.max_length());
    const SeparationReport rep =
        separation_check(orbits, model, T, number_or(section, "delta", 1.0),
                         number_or(section, "B", 2.5), static_cast<int>(number_or(section, "samples", 64)));
    Json r = record_header(cfg, spec, task);
    r["T"] = T;
    r["pass"] = rep.pass;
    r["vacuous"] = rep.vacuous;
    r["threshold"] = rep.threshold;
    r["min_distance"] = number(rep.min_distance);
    r["margin"] = number(rep.margin);
    r["overlap_ratio"] = number(rep.overlap_ratio);
    r["orbit_count"] = rep.orbit_count;
    Json pairs = Json::array();
    for (const auto& p : rep.pairs) {
      pairs.push_back(Json{{"first", p.first.str()},
                           {"second", p.second.str()},
                           {"min_distance", p.min_distance},
                           {"pass", p.pass}});
    }
    r["pairs"] = pairs;
    records.push_back(r);
  } else if (task == "corollary") {
    const MetricModel model = build_model(cfg.model);
    double h = number_or(section, "h", std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(h)) h = estimate_entropy(spec).h;
    double k1 = number_or(section, "k1", std::numeric_limits<double>::quiet_NaN());
    double k2 = number_or(section, "k2", std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(k1) || std::isnan(k2)) {
      const CurvatureBounds cb = curvature_bounds(model);
      if (std::isnan(k1)) k1 = cb.k1;
      if (std::isnan(k2)) k2 = cb.k2;
    }
    const int n = static_cast<int>(number_or(section, "n", model.boundary_dimension()));
    const CorollaryReport rep = corollary_arithmetic(h, k1, k2, n);
    Json r = record_header(cfg, spec, task);
    r["h"] = h;
    r["k1"] = k1;
    r["k2"] = k2;
    r["n"] = n;
    r["message"] = rep.message;
    r["upper_threshold"] = rep.upper_threshold;
    r["lower_threshold"] = rep.lower_threshold;
    if (rep.outcome == CorollaryOutcome::point_spectrum) r["s0_lower_bound"] = rep.s0_lower_bound;
    records.push_back(r);
  } else {
    throw ConfigError("unknown analyze task '" + task +
                      "' (expected zeta, entropy, pressure, trace, pot, separation or corollary)");
  }

  std::string body;
  for (const auto& r : records) body += r.dump() + "\n";
  write_text(prepare_output(cfg) / (task + ".jsonl"), body);
  log << body;
  return kExitOk;
}

}  // namespace lenspec::cli
