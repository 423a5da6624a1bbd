#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "walker/io.hpp"

namespace walker::harness {

// Exit codes double as machine-parsable error categories; helpers below print
// "error: <category>: <message>" to stderr before returning them.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kDecodeError = 4,
  kRuntimeError = 5,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> stride;
};

// Runs the GA and writes history.csv, best.json, config_echo.json and run.log
// into out_dir. History and best-so-far are flushed every generation, so an
// interrupted run keeps its last completed generation.
int cmd_evolve(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
               const Overrides& overrides = {});

// Replays one individual: trajectory.csv, frames/, metrics.txt. A provenance
// hash mismatch is reported as a warning, not an error.
int cmd_replay(const std::filesystem::path& individual_path,
               const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
               const Overrides& overrides = {});

// Replays one individual over a list of ground profiles and writes sweep.csv.
// Profile syntax: "flat", "slope:<degrees>".
int cmd_sweep(const std::filesystem::path& individual_path,
              const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
              const std::vector<std::string>& profiles, const Overrides& overrides = {});

mech::GroundProfile parse_profile_spec(const std::string& spec);

}  // namespace walker::harness
