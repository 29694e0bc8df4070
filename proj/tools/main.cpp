#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

int main(int argc, char** argv) {
  using namespace lenspec::cli;

  CLI::App app{"lenspec: closed geodesics, length spectra and periodic-orbit analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  unsigned workers = 0;
  std::string spectrum_path;
  std::string orbits_path;
  std::string task;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");
    cmd->add_option("--set", overrides, "override a configuration value: key.path=value");
  };

  CLI::App* validate = app.add_subcommand("validate-model", "check the configured model");
  add_common(validate);

  CLI::App* enumerate = app.add_subcommand("enumerate", "find all closed geodesics up to the configured word length");
  add_common(enumerate);
  enumerate->add_option("--workers", workers, "worker threads (default: hardware concurrency)");

  CLI::App* analyze = app.add_subcommand("analyze", "evaluate an analysis task on a spectrum file");
  add_common(analyze);
  analyze->add_option("--spectrum", spectrum_path, "spectrum CSV")->required();
  analyze->add_option("--task", task, "zeta, entropy, pressure, trace, pot, separation or corollary")
      ->required();
  analyze->add_option("--orbits", orbits_path, "orbit sidecar (default: orbits.json beside the spectrum)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  return guarded(
      [&] {
        if (!out_dir.empty()) overrides.push_back("output_dir=" + Json(out_dir).dump());
        const RunConfig cfg = load_config(config_path, overrides);
        if (*validate) return cmd_validate_model(cfg, std::cout);
        if (*enumerate) return cmd_enumerate(cfg, workers, std::cout);
        return cmd_analyze(cfg, spectrum_path, task, orbits_path, std::cout);
      },
      std::cerr);
}
