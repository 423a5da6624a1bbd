#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "walker/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"five-link CPG walker: evolve controllers, replay gaits, sweep terrains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string individual_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  double stride = 0.0;
  std::vector<std::string> profiles;

  auto add_common = [&](CLI::App* cmd, bool needs_individual) {
    cmd->add_option("--config", config_path, "run configuration JSON")->required();
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the configured RNG seed");
    cmd->add_option("--stride", stride, "override trajectory sampling stride [s]");
    if (needs_individual) {
      cmd->add_option("--individual", individual_path, "individual JSON to replay")->required();
    }
  };

  CLI::App* evolve = app.add_subcommand("evolve", "run the genetic algorithm");
  add_common(evolve, false);

  CLI::App* replay = app.add_subcommand("replay", "replay a saved individual");
  add_common(replay, true);

  CLI::App* sweep = app.add_subcommand("sweep", "replay an individual across ground profiles");
  add_common(sweep, true);
  sweep->add_option("--profiles", profiles, "profile specs: flat or slope:<deg>")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  walker::harness::Overrides overrides;
  if (app.count_all() && (evolve->count("--seed") || replay->count("--seed") || sweep->count("--seed"))) {
    overrides.seed = seed;
  }
  if (evolve->count("--stride") || replay->count("--stride") || sweep->count("--stride")) {
    overrides.stride = stride;
  }

  if (evolve->parsed()) return walker::harness::cmd_evolve(config_path, out_dir, overrides);
  if (replay->parsed()) return walker::harness::cmd_replay(individual_path, config_path, out_dir, overrides);
  return walker::harness::cmd_sweep(individual_path, config_path, out_dir, profiles, overrides);
}
