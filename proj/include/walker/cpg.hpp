#pragma once

#include <array>
#include <string>
#include <vector>

#include "walker/errors.hpp"

namespace walker::cpg {

// One oscillatory unit per joint, two neurons (flexor/extensor) per unit.
enum class Unit : int { LeftHip = 0, RightHip = 1, LeftKnee = 2, RightKnee = 3 };
enum class Side : int { Flexor = 0, Extensor = 1 };

constexpr int kNumUnits = 4;
constexpr int kNumNeurons = 8;

struct NeuronId {
  Unit unit;
  Side side;

  int index() const { return static_cast<int>(unit) * 2 + static_cast<int>(side); }
  static NeuronId from_index(int i) {
    return {static_cast<Unit>(i / 2), static_cast<Side>(i % 2)};
  }
  // Left/right reflection: LeftHip <-> RightHip, LeftKnee <-> RightKnee.
  NeuronId mirrored() const {
    int u = static_cast<int>(unit);
    return {static_cast<Unit>(u ^ 1), side};
  }
  std::string name() const;
  bool operator==(const NeuronId&) const = default;
};

inline int mirror_index(int i) { return NeuronId::from_index(i).mirrored().index(); }

// Half-center oscillator constants.
struct OscillatorParams {
  double tau = 0.0;        // inner-state time constant [s]
  double tau_prime = 0.0;  // self-inhibition time constant [s]
  double beta = 0.0;       // self-inhibition coefficient
  double w_mutual = 0.0;   // flexor<->extensor coupling weight, enters as -w*y
  double u0 = 0.0;         // tonic excitatory input

  void validate() const;
};

struct OscillatorState {
  double u1 = 0.0, u2 = 0.0;  // inner states (neuron 1 = flexor, 2 = extensor)
  double v1 = 0.0, v2 = 0.0;  // self-inhibition variables

  bool finite() const;
};

struct Derivatives {
  double du1, du2, dv1, dv2;
};

// tau*du_i = u0 - u_i - w*y_other - beta*v_i + z_i + f_i, tau'*dv_i = -v_i + y_i.
Derivatives unit_derivatives(const OscillatorState& state, const OscillatorParams& params,
                             double z1, double z2, double f1, double f2);

// y = max(0,u1) - max(0,u2)
double unit_output(const OscillatorState& state);

// 8x8 inter-unit weights, entry (target, source). Intra-unit entries stay zero
// (the flexor/extensor coupling lives in OscillatorParams::w_mutual), hip->knee
// connections are one-way, and the matrix is left/right mirror symmetric.
class ConnectivityMatrix {
public:
  double at(NeuronId target, NeuronId source) const {
    return w_[target.index() * kNumNeurons + source.index()];
  }
  double at(int target, int source) const { return w_[target * kNumNeurons + source]; }
  void set(NeuronId target, NeuronId source, double value) {
    w_[target.index() * kNumNeurons + source.index()] = value;
  }

  std::vector<std::string> violations() const;
  void validate() const;  // throws ValidationError listing offending cells

  bool operator==(const ConnectivityMatrix&) const = default;

private:
  std::array<double, kNumNeurons * kNumNeurons> w_{};
};

// How fresh networks (and isolated units) are seeded. A perfectly symmetric
// start is a fixed point of the flexor/extensor swap, so u1 gets a small kick;
// right-side units get the swapped kick, otherwise the bilateral symmetry of
// the network pins the walker to zero net displacement forever.
struct InitialStateRule {
  double u1_scale = 0.1;  // u1 = u1_scale * u0
  double u2_scale = 0.0;  // u2 = u2_scale * u0
  double v1 = 0.0;
  double v2 = 0.0;
  bool antiphase_right = true;  // swap the kick for RightHip/RightKnee units

  OscillatorState make(const OscillatorParams& p) const {
    return {u1_scale * p.u0, u2_scale * p.u0, v1, v2};
  }
  OscillatorState make_right(const OscillatorParams& p) const {
    if (!antiphase_right) return make(p);
    return {u2_scale * p.u0, u1_scale * p.u0, v2, v1};
  }
};

struct CpgNetwork {
  std::array<OscillatorParams, kNumUnits> params;  // indexed by Unit
  std::array<OscillatorState, kNumUnits> states;
  ConnectivityMatrix connectivity;
  long steps = 0;

  const OscillatorParams& params_of(Unit u) const { return params[static_cast<int>(u)]; }
  OscillatorState& state_of(Unit u) { return states[static_cast<int>(u)]; }
  const OscillatorState& state_of(Unit u) const { return states[static_cast<int>(u)]; }

  // y_j = max(0, u_j) per neuron, indexed by NeuronId::index().
  std::array<double, kNumNeurons> neuron_outputs() const;
  // z_i = sum_j w_ij * y_j over the other units.
  std::array<double, kNumNeurons> network_inputs() const;
  // y = y1 - y2 per unit, indexed by Unit.
  std::array<double, kNumUnits> unit_outputs() const;

  // Left/right relabeling; connectivity is mirror-invariant so it is shared.
  CpgNetwork mirrored() const;
};

// Four units sharing the hip parameters; knee units run at tau/2, tau'/2 so
// they oscillate at twice the hip frequency.
CpgNetwork build_network(const OscillatorParams& hip_params, const ConnectivityMatrix& connectivity,
                         const InitialStateRule& rule = {});

// Classical RK4 step of all 16 state variables. Feedback f (per neuron) is held
// constant across the step; z is recomputed from neuron outputs at each stage.
void step_network(CpgNetwork& network, const std::array<double, kNumNeurons>& feedback, double dt);

}  // namespace walker::cpg
