#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "fixtures.hpp"
#include "lenspec/errors.hpp"

using namespace lenspec;
using namespace lenspec::cli;

namespace {

Json cylinder_doc(const std::string& out) {
  return Json{{"model", {{"kind", "cylinder"}, {"core_length", 2.0}}},
              {"max_word_length", 3},
              {"seed", 7},
              {"output_dir", out}};
}

Json schottky_doc(const std::string& out, int max_word_length) {
  return Json{{"model",
               {{"kind", "schottky"},
                {"generators", Json::parse("[[[2, 1.5], [2, 2]], [[4, 15], [1, 4]]]")}}},
              {"max_word_length", max_word_length},
              {"seed", 11},
              {"output_dir", out}};
}

// last JSON record written by an analysis task
Json run_task(const RunConfig& cfg, const std::string& task, int* code = nullptr) {
  std::ostringstream log;
  std::ostringstream err;
  const int rc = guarded(
      [&] { return cmd_analyze(cfg, cfg.output_dir + "/spectrum.csv", task, "", log); }, err);
  if (code) *code = rc;
  if (rc != kExitOk) return Json();
  std::ifstream in(cfg.output_dir + "/" + task + ".jsonl");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  return Json::parse(last);
}

}  // namespace

TEST_CASE("configuration defaults, overrides and validation") {
  Json doc = cylinder_doc("out");
  apply_override(doc, "tolerances.newton=1e-9");
  apply_override(doc, "counting_convention=with_iterates_oriented");
  const RunConfig cfg = parse_config(doc);
  CHECK(cfg.tolerances.newton == 1e-9);
  CHECK(cfg.tolerances.flow == 1e-12);
  CHECK(cfg.counting_convention.str() == "with_iterates_oriented");
  CHECK(cfg.hash.size() == 16);

  Json bad = cylinder_doc("out");
  bad["tolerances"] = {{"flow", -1.0}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = cylinder_doc("out");
  bad["max_word_length"] = 0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = cylinder_doc("out");
  bad["model"]["kind"] = "torus";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST_CASE("the configuration hash ignores the output directory only") {
  const auto a = parse_config(cylinder_doc("one")).hash;
  const auto b = parse_config(cylinder_doc("two")).hash;
  CHECK(a == b);
  Json other = cylinder_doc("one");
  other["seed"] = 8;
  CHECK(parse_config(other).hash != a);
}

TEST_CASE("enumerate and analyze the cylinder") {
  const std::string dir = lenspec::testing::scratch_dir("cli_cylinder");
  const RunConfig cfg = parse_config(cylinder_doc(dir));
  std::ostringstream log;
  REQUIRE(cmd_enumerate(cfg, 1, log) == kExitOk);
  CHECK(log.str().find("orbits=1 horizon=") != std::string::npos);
  const auto spec = load(dir + "/spectrum.csv");
  CHECK(spec.primitives().size() == 1);
  CHECK(spec.max_length() >= 6.0);
  CHECK(spec.seed == 7);
  CHECK(spec.config_hash == cfg.hash);

  Json doc = cylinder_doc(dir);
  doc["analysis"] = Json::parse(R"({"zeta": {"s": 1.0, "k_max": 200},
                                    "trace": {"center": 2.0, "width": 1.0}})");
  const RunConfig acfg = parse_config(doc);
  const Json z = run_task(acfg, "zeta");
  CHECK(z["value"][0].get<double>() == doctest::Approx(1.1565176).epsilon(1e-7));
  CHECK(z["config_hash"] == acfg.hash);
  CHECK(z["seed"] == 7);
  const Json t = run_task(acfg, "trace");
  CHECK(t["value"].get<double>() == doctest::Approx(0.850918).epsilon(1e-6));

  const Json e = run_task(acfg, "entropy");
  CHECK(e["vacuous"] == true);
  int code = 0;
  run_task(acfg, "no_such_task", &code);
  CHECK(code == kExitConfig);
}

TEST_CASE("enumerate counts Schottky classes and rejects bad generators") {
  const std::string dir = lenspec::testing::scratch_dir("cli_schottky");
  std::ostringstream log;
  REQUIRE(cmd_enumerate(parse_config(schottky_doc(dir, 2)), 2, log) == kExitOk);
  CHECK(log.str().find("orbits=4 ") != std::string::npos);

  Json bad = schottky_doc(dir, 2);
  bad["model"]["generators"][1] = Json::parse("[[2.4, 1.9], [2, 2]]");
  std::ostringstream err;
  const int rc = guarded([&] { return cmd_enumerate(parse_config(bad), 1, log); }, err);
  CHECK(rc == kExitConfig);
  CHECK(err.str().find("Schottky validation failed") != std::string::npos);
}

TEST_CASE("entropy task on a synthetic spectrum file") {
  const std::string dir = lenspec::testing::scratch_dir("cli_synthetic");
  auto spec = lenspec::testing::synthetic_pot_spectrum(0.5, 24.0);
  save(spec, dir + "/spectrum.csv");
  const RunConfig cfg = parse_config(cylinder_doc(dir));
  const Json e = run_task(cfg, "entropy");
  CHECK(std::abs(e["h"].get<double>() - 0.5) <= 0.05);

  Json doc = cylinder_doc(dir);
  doc["analysis"] = Json::parse(R"({"trace": {"center": 30.0, "width": 2.0}})");
  int code = 0;
  run_task(parse_config(doc), "trace", &code);
  CHECK(code == kExitIncompleteHorizon);
}
