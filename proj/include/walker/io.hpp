#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "walker/coupling.hpp"
#include "walker/evolution.hpp"

namespace walker::io {

// Run configuration: simulation + GA + export settings, read from a JSON file.
// Unknown keys are rejected; omitted keys fall back to defaults, and the fully
// resolved config can be echoed back so runs are self-describing.
struct RunConfig {
  coupling::SimConfig sim;
  evolution::GaConfig ga;
  int frame_stride = 5;  // SVG frame every N trajectory samples
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);  // resolved echo, stable key order

// FNV-1a over the resolved config echo; embedded in artifacts so a replay can
// detect that an individual came from a different configuration.
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

struct Provenance {
  std::uint64_t seed = 0;
  int generation = 0;
  std::string config_hash;
};

struct IndividualFile {
  evolution::Chromosome chromosome{};
  Provenance provenance;
};

std::string dump_individual(const IndividualFile& individual,
                            const evolution::GeneBounds& bounds);  // includes decoded echo
IndividualFile parse_individual(const std::string& json_text);
IndividualFile load_individual(const std::filesystem::path& path);

// Trajectory CSV: header plus one fixed-format row per sample, columns
// t,hip_x,hip_y,theta1..theta5,tl,tr,y_LH,y_RH,y_LK,y_RK.
void write_trajectory_csv(std::ostream& os, const coupling::EpisodeResult& result);
std::string trajectory_csv(const coupling::EpisodeResult& result);

// Stick-figure SVG frames (left leg dashed gray, right solid black, torso tick,
// contact marks under the ground line) plus an index page.
std::string render_frame_svg(const coupling::TrajectorySample& sample,
                             const mech::Geometry& geom, const mech::GroundProfile& ground);
void write_frames(const std::filesystem::path& dir, const coupling::EpisodeResult& result,
                  const mech::Geometry& geom, const mech::GroundProfile& ground, int frame_stride);

// Fixed-format float used in all text artifacts (locale-independent).
std::string format_value(double v);

}  // namespace walker::io
