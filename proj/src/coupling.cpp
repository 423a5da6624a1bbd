#include "walker/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace walker::coupling {

using cpg::NeuronId;
using cpg::Side;
using cpg::Unit;

double scale_output(double y, ActuatorLimit limit) {
  return std::clamp(y, -1.0, 1.0) * limit.omega_max;
}

std::array<double, cpg::kNumNeurons> compute_feedback(const mech::MechanismState& s,
                                                      const FeedbackGains& gains) {
  const double tl = s.left_contact ? 1.0 : 0.0;
  const double tr = s.right_contact ? 1.0 : 0.0;

  // Hip terms: a1*(th1+th3-pi) - a1*(th1+th2-pi) + a1*t_r reduces to the
  // thigh-angle difference; written in the reduced form so the left/right
  // expressions are exact floating-point negations of each other.
  const double lh = gains.a1 * (s.theta3 - s.theta2) + gains.a1 * tr;
  const double rh = gains.a1 * (s.theta2 - s.theta3) + gains.a1 * tl;
  const double lk = gains.a2 * tr * (s.theta1 + s.theta2 + s.theta4 - M_PI);
  const double rk = gains.a2 * tl * (s.theta1 + s.theta3 + s.theta5 - M_PI);

  std::array<double, cpg::kNumNeurons> f{};
  f[NeuronId{Unit::LeftHip, Side::Flexor}.index()] = lh;
  f[NeuronId{Unit::LeftHip, Side::Extensor}.index()] = -lh;
  f[NeuronId{Unit::RightHip, Side::Flexor}.index()] = rh;
  f[NeuronId{Unit::RightHip, Side::Extensor}.index()] = -rh;
  f[NeuronId{Unit::LeftKnee, Side::Flexor}.index()] = lk;
  f[NeuronId{Unit::LeftKnee, Side::Extensor}.index()] = -lk;
  f[NeuronId{Unit::RightKnee, Side::Flexor}.index()] = rk;
  f[NeuronId{Unit::RightKnee, Side::Extensor}.index()] = -rk;
  return f;
}

void SimConfig::validate() const {
  geometry.validate();
  contact.validate();
  if (!(gravity > 0.0)) throw ValidationError("gravity must be > 0");
  if (!(limit.omega_max > 0.0)) throw ValidationError("omega_max must be > 0");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(duration > 0.0)) throw ValidationError("duration must be > 0");
  if (!(drop_height >= 0.0)) throw ValidationError("drop_height must be >= 0");
  if (!(stride >= dt)) throw ValidationError("stride must be >= dt");
}

mech::MechanismState initial_stance(const SimConfig& sim) {
  mech::MechanismState s;
  s.hip_x = 0.0;
  s.hip_y = sim.ground.eval(0.0) + sim.geometry.leg_length() + sim.drop_height;
  return s;
}

EpisodeResult simulate_episode(const Controller& controller, const SimConfig& sim,
                               double duration, std::uint64_t /*seed*/) {
  sim.validate();
  if (!(duration > 0.0)) throw ValidationError("duration must be > 0");

  cpg::CpgNetwork net = controller.network;
  mech::MechanismState state = initial_stance(sim);

  const long total_steps = std::lround(duration / sim.dt);
  const long sample_every = std::max<long>(1, std::lround(sim.stride / sim.dt));

  EpisodeResult result;
  result.trajectory.stride = sample_every * sim.dt;

  // Once the walker has toppled, the mechanism model no longer applies: the
  // joints are velocity sources and the only ground contact is at the feet,
  // so a body dragged along the ground keeps gaining energy. With
  // terminate_on_fall off the mechanism is therefore held at the fall state
  // (with sensors reading zero) while the oscillators keep running.
  bool fallen = false;

  auto sense = [&]() -> std::array<double, cpg::kNumNeurons> {
    if (fallen) return {};
    return compute_feedback(state, controller.gains);
  };

  auto record = [&](double t) {
    result.trajectory.samples.push_back({t, state, net.unit_outputs(), sense()});
  };
  record(0.0);

  result.terminated_by = Termination::Timeout;
  for (long k = 1; k <= total_steps; ++k) {
    const auto feedback = sense();
    cpg::step_network(net, feedback, sim.dt);

    if (!fallen) {
      const auto y = net.unit_outputs();
      mech::JointVelocities rates;
      rates.left_hip = scale_output(y[static_cast<int>(Unit::LeftHip)], sim.limit);
      rates.right_hip = scale_output(y[static_cast<int>(Unit::RightHip)], sim.limit);
      rates.left_knee = scale_output(y[static_cast<int>(Unit::LeftKnee)], sim.limit);
      rates.right_knee = scale_output(y[static_cast<int>(Unit::RightKnee)], sim.limit);
      mech::step_mechanism(state, rates, sim.geometry, sim.contact, sim.ground, sim.gravity,
                           sim.dt);
    }

    if (k % sample_every == 0) record(k * sim.dt);
    if (!fallen && mech::detect_fall(state, sim.geometry, sim.ground)) {
      fallen = true;
      result.terminated_by = Termination::Fall;
      if (sim.terminate_on_fall) {
        result.wall_steps = k;
        break;
      }
    }
    result.wall_steps = k;
  }

  result.displacement =
      result.trajectory.samples.back().state.hip_x - result.trajectory.samples.front().state.hip_x;
  result.steps_taken = count_steps(result.trajectory);
  return result;
}

int count_steps(const Trajectory& trajectory) {
  constexpr double kDebounceWindow = 0.05;  // [s]
  int count = 0;
  int last_counted_foot = -1;  // 0 = left, 1 = right
  double last_touchdown[2] = {-1e30, -1e30};
  bool prev[2] = {false, false};

  bool first = true;
  for (const auto& sample : trajectory.samples) {
    const bool now[2] = {sample.state.left_contact, sample.state.right_contact};
    if (!first) {
      for (int foot = 0; foot < 2; ++foot) {
        if (now[foot] && !prev[foot]) {
          const bool bounced = sample.t - last_touchdown[foot] < kDebounceWindow;
          if (!bounced && last_counted_foot != foot) {
            ++count;
            last_counted_foot = foot;
          }
          last_touchdown[foot] = sample.t;
        }
      }
    }
    prev[0] = now[0];
    prev[1] = now[1];
    first = false;
  }
  return count;
}

}  // namespace walker::coupling
