#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lenspec/errors.hpp"

namespace lenspec::cli {

namespace {

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing field " + where + "." + key);
  }
  return obj.at(key);
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

double positive(const Json& obj, const char* key, const std::string& where) {
  const double x = require_number(obj, key, where);
  if (!(x > 0.0)) throw ConfigError(where + "." + key + " must be positive");
  return x;
}

Eigen::Matrix2d parse_matrix(const Json& m, std::size_t index) {
  const std::string name = "model.generators[" + std::to_string(index) + "]";
  if (!m.is_array() || m.size() != 2) throw ConfigError(name + " must be a 2x2 array");
  Eigen::Matrix2d out;
  for (int i = 0; i < 2; ++i) {
    if (!m[i].is_array() || m[i].size() != 2) throw ConfigError(name + " must be a 2x2 array");
    for (int j = 0; j < 2; ++j) {
      if (!m[i][j].is_number()) throw ConfigError(name + " entries must be numbers");
      out(i, j) = m[i][j].get<double>();
    }
  }
  return out;
}

}  // namespace

Json default_document() {
  return Json{{"max_word_length", 4},
              {"tolerances", {{"flow", 1e-12}, {"newton", 1e-10}, {"shorten", 1e-12}, {"dedupe", 1e-6}}},
              {"counting_convention", "primitive_unoriented"},
              {"output_dir", "out"},
              {"seed", 0},
              {"analysis", Json::object()}};
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must have the form key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) {
    if (part.empty()) throw ConfigError("empty path component in override " + key);
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
  (*node)[parts.back()] = value;
}

std::string config_hash(const Json& doc) {
  Json canonical = doc;
  canonical.erase("output_dir");
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MetricModel build_model(const Json& model) {
  if (!model.is_object()) throw ConfigError("model must be an object");
  const Json& kind_field = require(model, "kind", "model");
  if (!kind_field.is_string()) throw ConfigError("model.kind must be a string");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "half_plane") return MetricModel::half_plane();
  if (kind == "cylinder") return MetricModel::cylinder(positive(model, "core_length", "model"));
  if (kind == "schottky") {
    const Json& gens = require(model, "generators", "model");
    if (!gens.is_array() || gens.empty()) {
      throw ConfigError("model.generators must be a nonempty array of 2x2 matrices");
    }
    std::vector<Eigen::Matrix2d> mats;
    for (std::size_t i = 0; i < gens.size(); ++i) mats.push_back(parse_matrix(gens[i], i));
    return MetricModel::schottky(std::move(mats));
  }
  if (kind == "perturbed") {
    const MetricModel base = build_model(require(model, "base", "model"));
    const Json& bump = require(model, "bump", "model");
    const Json& center = require(bump, "center", "model.bump");
    if (!center.is_array() || center.size() != 2 || !center[0].is_number() ||
        !center[1].is_number()) {
      throw ConfigError("model.bump.center must be [u, v]");
    }
    return MetricModel::perturbed(base,
                                  ChartPoint{center[0].get<double>(), center[1].get<double>(),
                                             base.chart()},
                                  positive(bump, "radius", "model.bump"),
                                  require_number(bump, "amplitude", "model.bump"));
  }
  throw ConfigError("unknown model.kind '" + kind + "'");
}

RunConfig parse_config(const Json& input) {
  if (!input.is_object()) throw ConfigError("configuration must be a JSON object");
  Json doc = default_document();
  doc.merge_patch(input);

  RunConfig cfg;
  cfg.model = require(doc, "model", "config");
  build_model(cfg.model);

  const Json& mwl = doc["max_word_length"];
  if (!mwl.is_number_integer() || mwl.get<long>() < 1 || mwl.get<long>() > 64) {
    throw ConfigError("max_word_length must be an integer in [1, 64]");
  }
  cfg.max_word_length = mwl.get<int>();

  const Json& tol = doc["tolerances"];
  if (!tol.is_object()) throw ConfigError("tolerances must be an object");
  for (const auto& [name, value] : tol.items()) {
    if (!value.is_number() || !(value.get<double>() > 0.0)) {
      throw ConfigError("tolerance " + name + " must be a positive number");
    }
  }
  cfg.tolerances.flow = positive(tol, "flow", "tolerances");
  cfg.tolerances.newton = positive(tol, "newton", "tolerances");
  cfg.tolerances.shorten = positive(tol, "shorten", "tolerances");
  cfg.tolerances.dedupe = positive(tol, "dedupe", "tolerances");
  if (cfg.tolerances.flow < 1e-13 || cfg.tolerances.flow > 1e-6) {
    throw ConfigError("tolerances.flow must lie in [1e-13, 1e-6]");
  }

  const Json& conv = doc["counting_convention"];
  if (!conv.is_string()) throw ConfigError("counting_convention must be a string");
  try {
    cfg.counting_convention = CountingConvention::parse(conv.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const Json& out = doc["output_dir"];
  if (!out.is_string() || out.get<std::string>().empty()) {
    throw ConfigError("output_dir must be a nonempty string");
  }
  cfg.output_dir = out.get<std::string>();

  const Json& seed = doc["seed"];
  if (!seed.is_number_integer() || seed.get<long long>() < 0) {
    throw ConfigError("seed must be a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  cfg.analysis = doc["analysis"];
  if (!cfg.analysis.is_object()) throw ConfigError("analysis must be an object");

  cfg.document = doc;
  cfg.hash = config_hash(doc);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("configuration file " + path + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

OrbitSearchOptions search_options(const MetricModel& model, const Tolerances& tol) {
  OrbitSearchOptions o = OrbitSearchOptions::for_model(model);
  o.newton_tol = tol.newton;
  o.shorten_tol = tol.shorten;
  o.newton.flow_tol = tol.flow;
  return o;
}

}  // namespace lenspec::cli
