#pragma once

// Run configuration: JSON file plus dotted-path overrides, validated and
// hashed so every output can name the exact configuration that produced it.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lenspec/geometry.hpp"
#include "lenspec/orbits.hpp"
#include "lenspec/spectrum.hpp"

namespace lenspec::cli {

using Json = nlohmann::json;

struct Tolerances {
  double flow = 1e-12;
  double newton = 1e-10;
  double shorten = 1e-12;
  double dedupe = 1e-6;
};

struct RunConfig {
  Json model;
  int max_word_length = 4;
  Tolerances tolerances;
  CountingConvention counting_convention;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  Json analysis = Json::object();

  // canonical document after defaults and overrides
  Json document;
  std::string hash;
};

Json default_document();

// "a.b.c=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& doc, const std::string& assignment);

// Throws ConfigError on any missing or invalid field.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

// FNV-1a 64 over the canonical dump, excluding output_dir.
std::string config_hash(const Json& doc);

MetricModel build_model(const Json& model);
OrbitSearchOptions search_options(const MetricModel& model, const Tolerances& tol);

}  // namespace lenspec::cli
