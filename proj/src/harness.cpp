#include "walker/harness.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace walker::harness {

namespace fs = std::filesystem;

namespace {

int fail(int code, const char* category, const std::string& message) {
  std::cerr << "error: " << category << ": " << message << "\n";
  return code;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

io::RunConfig load_config(const fs::path& path, const Overrides& overrides) {
  io::RunConfig cfg = io::load_run_config(path);
  if (overrides.seed) cfg.ga.rng_seed = *overrides.seed;
  if (overrides.stride) cfg.sim.stride = *overrides.stride;
  cfg.sim.validate();
  cfg.ga.validate();
  return cfg;
}

std::string provenance_header(const io::RunConfig& cfg) {
  return "# config_hash=" + io::config_hash_hex(cfg) +
         " seed=" + std::to_string(cfg.ga.rng_seed) + "\n";
}

std::string metrics_text(const io::RunConfig& cfg, const coupling::EpisodeResult& result) {
  std::ostringstream os;
  os << "displacement_m=" << io::format_value(result.displacement) << "\n"
     << "steps=" << result.steps_taken << "\n"
     << "terminated_by=" << (result.terminated_by == coupling::Termination::Fall ? "Fall" : "Timeout")
     << "\n"
     << "wall_steps=" << result.wall_steps << "\n"
     << "config_hash=" << io::config_hash_hex(cfg) << "\n"
     << "seed=" << cfg.ga.rng_seed << "\n";
  return os.str();
}

}  // namespace

mech::GroundProfile parse_profile_spec(const std::string& spec) {
  if (spec == "flat") return mech::GroundProfile::flat();
  if (spec.rfind("slope:", 0) == 0) {
    const std::string deg = spec.substr(6);
    size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(deg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != deg.size() || deg.empty()) {
      throw ValidationError("bad slope angle in profile '" + spec + "'");
    }
    return mech::GroundProfile::slope(value * M_PI / 180.0);
  }
  throw ValidationError("unknown profile spec '" + spec + "' (expected flat or slope:<deg>)");
}

int cmd_evolve(const fs::path& config_path, const fs::path& out_dir, const Overrides& overrides) {
  io::RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const ValidationError& e) {
    return fail(kConfigError, "config", e.what());
  }

  try {
    fs::create_directories(out_dir);
    write_file(out_dir / "config_echo.json", io::dump_run_config(cfg) + "\n");

    const std::string hash = io::config_hash_hex(cfg);
    std::ofstream history(out_dir / "history.csv", std::ios::binary);
    std::ofstream log(out_dir / "run.log", std::ios::binary);
    history << provenance_header(cfg) << "generation,best_fitness,mean_fitness";
    for (int i = 0; i < evolution::kNumGenes; ++i) history << ",g" << i;
    history << "\n";
    log << provenance_header(cfg);

    auto on_generation = [&](const evolution::GenerationStats& stats) {
      history << stats.generation << ',' << io::format_value(stats.best_fitness) << ','
              << io::format_value(stats.mean_fitness);
      for (double g : stats.best_chromosome) history << ',' << io::format_value(g);
      history << '\n';
      history.flush();
      log << "generation " << stats.generation << " best " << io::format_value(stats.best_fitness)
          << " mean " << io::format_value(stats.mean_fitness) << "\n";
      log.flush();

      io::IndividualFile best;
      best.chromosome = stats.best_chromosome;
      best.provenance = {cfg.ga.rng_seed, stats.generation, hash};
      write_file(out_dir / "best.json", io::dump_individual(best, cfg.ga.bounds) + "\n");
    };

    evolution::evolve_walker(cfg.ga, cfg.sim, on_generation);
    log << "done\n";
    return kOk;
  } catch (const ValidationError& e) {
    return fail(kConfigError, "config", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntimeError, "runtime", e.what());
  }
}

int cmd_replay(const fs::path& individual_path, const fs::path& config_path,
               const fs::path& out_dir, const Overrides& overrides) {
  io::RunConfig cfg;
  io::IndividualFile ind;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const ValidationError& e) {
    return fail(kConfigError, "config", e.what());
  }
  try {
    ind = io::load_individual(individual_path);
  } catch (const ValidationError& e) {
    return fail(kDecodeError, "decode", e.what());
  }

  const std::string hash = io::config_hash_hex(cfg);
  if (!ind.provenance.config_hash.empty() && ind.provenance.config_hash != hash) {
    std::cerr << "warning: individual was produced under config " << ind.provenance.config_hash
              << ", replaying under " << hash << "\n";
  }

  try {
    const auto controller =
        evolution::make_controller(ind.chromosome, cfg.ga.bounds, cfg.sim.initial_state);
    const auto result =
        coupling::simulate_episode(controller, cfg.sim, cfg.sim.duration, ind.provenance.seed);

    fs::create_directories(out_dir);
    write_file(out_dir / "trajectory.csv", provenance_header(cfg) + io::trajectory_csv(result));
    write_file(out_dir / "metrics.txt", metrics_text(cfg, result));
    io::write_frames(out_dir / "frames", result, cfg.sim.geometry, cfg.sim.ground,
                     cfg.frame_stride);

    std::cout << "displacement " << io::format_value(result.displacement) << " m, "
              << result.steps_taken << " steps, "
              << (result.terminated_by == coupling::Termination::Fall ? "fell" : "timed out")
              << "\n";
    return kOk;
  } catch (const ValidationError& e) {
    return fail(kDecodeError, "decode", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntimeError, "runtime", e.what());
  }
}

int cmd_sweep(const fs::path& individual_path, const fs::path& config_path, const fs::path& out_dir,
              const std::vector<std::string>& profiles, const Overrides& overrides) {
  io::RunConfig cfg;
  io::IndividualFile ind;
  try {
    cfg = load_config(config_path, overrides);
    if (profiles.empty()) throw ValidationError("profile list is empty");
    for (const auto& p : profiles) parse_profile_spec(p);  // validate up front
  } catch (const ValidationError& e) {
    return fail(kConfigError, "config", e.what());
  }
  try {
    ind = io::load_individual(individual_path);
  } catch (const ValidationError& e) {
    return fail(kDecodeError, "decode", e.what());
  }

  try {
    fs::create_directories(out_dir);
    std::ostringstream table;
    table << provenance_header(cfg) << "profile,displacement_m,steps,terminated_by,status\n";

    for (const auto& spec : profiles) {
      io::RunConfig run = cfg;
      run.sim.ground = parse_profile_spec(spec);
      try {
        const auto controller =
            evolution::make_controller(ind.chromosome, run.ga.bounds, run.sim.initial_state);
        const auto result =
            coupling::simulate_episode(controller, run.sim, run.sim.duration, ind.provenance.seed);
        table << spec << ',' << io::format_value(result.displacement) << ',' << result.steps_taken
              << ','
              << (result.terminated_by == coupling::Termination::Fall ? "Fall" : "Timeout")
              << ",ok\n";
      } catch (const std::exception& e) {
        table << spec << ",,,," << "failed: " << e.what() << "\n";
      }
    }
    write_file(out_dir / "sweep.csv", table.str());
    std::cout << (out_dir / "sweep.csv").string() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    return fail(kIoError, "io", e.what());
  }
}

}  // namespace walker::harness
