#pragma once

// Subcommands of the lenspec tool. Each returns the process exit code and
// writes human-readable progress to `log`.

#include <functional>
#include <iosfwd>
#include <string>

#include "config.hpp"

namespace lenspec::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNonConvergence = 2,
  kExitIncompleteHorizon = 3,
  kExitFailure = 4,
};

int cmd_validate_model(const RunConfig& cfg, std::ostream& log);

// Writes spectrum.csv and orbits.json under cfg.output_dir.
int cmd_enumerate(const RunConfig& cfg, unsigned workers, std::ostream& log);

// task: zeta, entropy, pressure, trace, pot, separation or corollary. Writes
// <task>.jsonl (and pot_ratio.csv for pot) under cfg.output_dir. The orbit
// sidecar defaults to orbits.json next to the spectrum.
int cmd_analyze(const RunConfig& cfg, const std::string& spectrum_path, const std::string& task,
                const std::string& orbits_path, std::ostream& log);

// Runs `body` and maps lenspec errors to exit codes, printing the message.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace lenspec::cli
