#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "walker/cpg.hpp"
#include "walker/mechanism.hpp"

namespace walker::coupling {

struct FeedbackGains {
  double a1 = 0.0;  // hip pathway gain
  double a2 = 0.0;  // knee pathway gain
};

struct ActuatorLimit {
  double omega_max = 5.51;  // [rad/s]
};

// Unit output -> joint angular speed: clamp y to [-1, 1], scale by omega_max.
double scale_output(double y, ActuatorLimit limit);

// Posture/contact feedback per neuron: hip units react to the thigh-angle
// difference and the opposite foot's contact, knee units to the shank's
// deviation from vertical gated by the opposite foot's contact. Within every
// unit f2 = -f1.
std::array<double, cpg::kNumNeurons> compute_feedback(const mech::MechanismState& state,
                                                      const FeedbackGains& gains);

struct SimConfig {
  mech::Geometry geometry;
  mech::ContactModel contact;
  mech::GroundProfile ground = mech::GroundProfile::flat();
  double gravity = 9.81;       // [m/s^2]
  ActuatorLimit limit;
  double dt = 1e-3;            // shared CPG/mechanism timestep [s]
  double duration = 10.0;      // default episode length [s]
  double drop_height = 1e-3;   // initial clearance above stand height [m]
  double stride = 0.01;        // trajectory sampling interval [s]
  bool terminate_on_fall = true;
  cpg::InitialStateRule initial_state;

  void validate() const;
};

struct TrajectorySample {
  double t;
  mech::MechanismState state;
  std::array<double, cpg::kNumUnits> unit_outputs;
  std::array<double, cpg::kNumNeurons> feedback;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double stride = 0.0;
};

enum class Termination { Fall, Timeout };

struct EpisodeResult {
  Trajectory trajectory;
  double displacement = 0.0;  // final minus initial hip_x [m]
  int steps_taken = 0;        // alternating touchdown count
  Termination terminated_by = Termination::Timeout;
  long wall_steps = 0;        // integration steps executed
};

struct Controller {
  cpg::CpgNetwork network;
  FeedbackGains gains;
};

// Upright stance, the configured drop height above the ground, then the shared
// closed loop: feedback -> CPG step -> output scaling -> mechanism step, until
// a fall or timeout. Fully deterministic for a given controller and config;
// the seed is recorded for provenance only.
EpisodeResult simulate_episode(const Controller& controller, const SimConfig& sim,
                               double duration, std::uint64_t seed);

inline EpisodeResult simulate_episode(const Controller& controller, const SimConfig& sim,
                                      std::uint64_t seed = 0) {
  return simulate_episode(controller, sim, sim.duration, seed);
}

// Alternating touchdown count; repeated same-foot touchdowns within 50 ms merge
// into one, non-alternating repeats do not count.
int count_steps(const Trajectory& trajectory);

// Initial posture used by simulate_episode (exposed for tests and tools).
mech::MechanismState initial_stance(const SimConfig& sim);

}  // namespace walker::coupling
