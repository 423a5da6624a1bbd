#include "walker/cpg.hpp"

#include <cmath>
#include <sstream>

namespace walker::cpg {

namespace {

const char* kUnitNames[] = {"LH", "RH", "LK", "RK"};
const char* kSideNames[] = {"F", "E"};

void require_finite(double x, const char* field) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string(field) + " is not finite");
  }
}

}  // namespace

std::string NeuronId::name() const {
  return std::string(kUnitNames[static_cast<int>(unit)]) + "_" + kSideNames[static_cast<int>(side)];
}

void OscillatorParams::validate() const {
  require_finite(tau, "tau");
  require_finite(tau_prime, "tau_prime");
  require_finite(beta, "beta");
  require_finite(w_mutual, "w_mutual");
  require_finite(u0, "u0");
  if (tau <= 0.0) throw ValidationError("tau must be > 0");
  if (tau_prime <= 0.0) throw ValidationError("tau_prime must be > 0");
  if (beta < 0.0) throw ValidationError("beta must be >= 0");
}

bool OscillatorState::finite() const {
  return std::isfinite(u1) && std::isfinite(u2) && std::isfinite(v1) && std::isfinite(v2);
}

Derivatives unit_derivatives(const OscillatorState& s, const OscillatorParams& p,
                             double z1, double z2, double f1, double f2) {
  p.validate();
  require_finite(s.u1, "u1");
  require_finite(s.u2, "u2");
  require_finite(s.v1, "v1");
  require_finite(s.v2, "v2");
  require_finite(z1, "z1");
  require_finite(z2, "z2");
  require_finite(f1, "f1");
  require_finite(f2, "f2");

  const double y1 = std::max(0.0, s.u1);
  const double y2 = std::max(0.0, s.u2);
  Derivatives d;
  d.du1 = (p.u0 - s.u1 - p.w_mutual * y2 - p.beta * s.v1 + z1 + f1) / p.tau;
  d.du2 = (p.u0 - s.u2 - p.w_mutual * y1 - p.beta * s.v2 + z2 + f2) / p.tau;
  d.dv1 = (-s.v1 + y1) / p.tau_prime;
  d.dv2 = (-s.v2 + y2) / p.tau_prime;
  return d;
}

double unit_output(const OscillatorState& s) {
  return std::max(0.0, s.u1) - std::max(0.0, s.u2);
}

std::vector<std::string> ConnectivityMatrix::violations() const {
  std::vector<std::string> bad;
  auto cell = [](NeuronId t, NeuronId s) { return "(" + t.name() + " <- " + s.name() + ")"; };
  for (int ti = 0; ti < kNumNeurons; ++ti) {
    for (int si = 0; si < kNumNeurons; ++si) {
      NeuronId t = NeuronId::from_index(ti);
      NeuronId s = NeuronId::from_index(si);
      const double v = at(ti, si);
      if (!std::isfinite(v)) {
        bad.push_back("non-finite entry " + cell(t, s));
        continue;
      }
      if (t.unit == s.unit && v != 0.0) {
        bad.push_back("intra-unit entry must be zero " + cell(t, s));
      }
      // Knee -> hip on the same side is forbidden (hip->knee is one-way).
      bool src_knee = s.unit == Unit::LeftKnee || s.unit == Unit::RightKnee;
      bool tgt_hip = t.unit == Unit::LeftHip || t.unit == Unit::RightHip;
      bool same_side = (static_cast<int>(s.unit) & 1) == (static_cast<int>(t.unit) & 1);
      if (src_knee && tgt_hip && same_side && v != 0.0) {
        bad.push_back("knee->hip entry must be zero " + cell(t, s));
      }
      if (at(t.mirrored(), s.mirrored()) != v) {
        bad.push_back("mirror asymmetry at " + cell(t, s));
      }
    }
  }
  return bad;
}

void ConnectivityMatrix::validate() const {
  auto bad = violations();
  if (bad.empty()) return;
  std::ostringstream oss;
  oss << "invalid connectivity matrix:";
  for (const auto& b : bad) oss << "\n  " << b;
  throw ValidationError(oss.str());
}

std::array<double, kNumNeurons> CpgNetwork::neuron_outputs() const {
  std::array<double, kNumNeurons> y;
  for (int u = 0; u < kNumUnits; ++u) {
    y[2 * u + 0] = std::max(0.0, states[u].u1);
    y[2 * u + 1] = std::max(0.0, states[u].u2);
  }
  return y;
}

namespace {

// z accumulated per mirror pair so a left/right relabeling permutes the
// operands of commutative additions only (keeps mirrored runs bit-identical).
std::array<double, kNumNeurons> inputs_from(const ConnectivityMatrix& w,
                                            const std::array<double, kNumNeurons>& y) {
  std::array<double, kNumNeurons> z;
  for (int t = 0; t < kNumNeurons; ++t) {
    double acc = 0.0;
    for (int s : {0, 1, 4, 5}) {  // left-side neurons; pair with their mirrors
      int sm = mirror_index(s);
      acc += w.at(t, s) * y[s] + w.at(t, sm) * y[sm];
    }
    z[t] = acc;
  }
  return z;
}

}  // namespace

std::array<double, kNumNeurons> CpgNetwork::network_inputs() const {
  return inputs_from(connectivity, neuron_outputs());
}

std::array<double, kNumUnits> CpgNetwork::unit_outputs() const {
  std::array<double, kNumUnits> y;
  for (int u = 0; u < kNumUnits; ++u) y[u] = unit_output(states[u]);
  return y;
}

CpgNetwork CpgNetwork::mirrored() const {
  CpgNetwork out = *this;
  for (int u = 0; u < kNumUnits; ++u) {
    out.params[u ^ 1] = params[u];
    out.states[u ^ 1] = states[u];
  }
  return out;
}

CpgNetwork build_network(const OscillatorParams& hip_params, const ConnectivityMatrix& connectivity,
                         const InitialStateRule& rule) {
  hip_params.validate();
  connectivity.validate();

  OscillatorParams knee_params = hip_params;
  knee_params.tau = hip_params.tau / 2.0;
  knee_params.tau_prime = hip_params.tau_prime / 2.0;

  CpgNetwork net;
  net.params = {hip_params, hip_params, knee_params, knee_params};
  for (int u = 0; u < kNumUnits; ++u) {
    const bool right_side = u & 1;
    net.states[u] = right_side ? rule.make_right(net.params[u]) : rule.make(net.params[u]);
  }
  net.connectivity = connectivity;
  return net;
}

namespace {

using StateVec = std::array<double, 4 * kNumUnits>;  // u1,u2,v1,v2 per unit

StateVec pack(const CpgNetwork& net) {
  StateVec x;
  for (int u = 0; u < kNumUnits; ++u) {
    x[4 * u + 0] = net.states[u].u1;
    x[4 * u + 1] = net.states[u].u2;
    x[4 * u + 2] = net.states[u].v1;
    x[4 * u + 3] = net.states[u].v2;
  }
  return x;
}

StateVec derivatives(const CpgNetwork& net, const StateVec& x,
                     const std::array<double, kNumNeurons>& f) {
  std::array<double, kNumNeurons> y;
  for (int u = 0; u < kNumUnits; ++u) {
    y[2 * u + 0] = std::max(0.0, x[4 * u + 0]);
    y[2 * u + 1] = std::max(0.0, x[4 * u + 1]);
  }
  const auto z = inputs_from(net.connectivity, y);

  StateVec dx;
  for (int u = 0; u < kNumUnits; ++u) {
    const OscillatorParams& p = net.params[u];
    const double u1 = x[4 * u + 0], u2 = x[4 * u + 1];
    const double v1 = x[4 * u + 2], v2 = x[4 * u + 3];
    dx[4 * u + 0] = (p.u0 - u1 - p.w_mutual * y[2 * u + 1] - p.beta * v1 + z[2 * u + 0] + f[2 * u + 0]) / p.tau;
    dx[4 * u + 1] = (p.u0 - u2 - p.w_mutual * y[2 * u + 0] - p.beta * v2 + z[2 * u + 1] + f[2 * u + 1]) / p.tau;
    dx[4 * u + 2] = (-v1 + y[2 * u + 0]) / p.tau_prime;
    dx[4 * u + 3] = (-v2 + y[2 * u + 1]) / p.tau_prime;
  }
  return dx;
}

}  // namespace

void step_network(CpgNetwork& net, const std::array<double, kNumNeurons>& feedback, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");

  const StateVec x0 = pack(net);
  StateVec xs;

  const StateVec k1 = derivatives(net, x0, feedback);
  for (size_t i = 0; i < x0.size(); ++i) xs[i] = x0[i] + 0.5 * dt * k1[i];
  const StateVec k2 = derivatives(net, xs, feedback);
  for (size_t i = 0; i < x0.size(); ++i) xs[i] = x0[i] + 0.5 * dt * k2[i];
  const StateVec k3 = derivatives(net, xs, feedback);
  for (size_t i = 0; i < x0.size(); ++i) xs[i] = x0[i] + dt * k3[i];
  const StateVec k4 = derivatives(net, xs, feedback);

  for (int u = 0; u < kNumUnits; ++u) {
    auto comb = [&](int j) {
      return x0[4 * u + j] + dt / 6.0 * (k1[4 * u + j] + 2.0 * k2[4 * u + j] + 2.0 * k3[4 * u + j] + k4[4 * u + j]);
    };
    net.states[u] = {comb(0), comb(1), comb(2), comb(3)};
  }
  ++net.steps;

  for (int u = 0; u < kNumUnits; ++u) {
    if (!net.states[u].finite()) {
      throw IntegrationError("CPG state diverged in unit " + std::string(kUnitNames[u]), net.steps);
    }
  }
}

}  // namespace walker::cpg
