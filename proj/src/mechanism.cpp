#include "walker/mechanism.hpp"

#include <algorithm>
#include <cmath>

namespace walker::mech {

namespace {

Vec2 dir(double phi) { return {std::sin(phi), std::cos(phi)}; }       // from vertical
Vec2 dir_rate(double phi) { return {std::cos(phi), -std::sin(phi)}; }

// Absolute link angles from vertical. The right leg runs in the mirrored
// sense so that the left/right swap with theta1 negated is a pure reflection.
struct LinkAngles {
  double thigh_l, shank_l, thigh_r, shank_r;
};

LinkAngles link_angles(const MechanismState& s) {
  LinkAngles a;
  a.thigh_l = s.theta1 + s.theta2;
  a.shank_l = a.thigh_l + s.theta4;
  a.thigh_r = s.theta1 - s.theta3;
  a.shank_r = a.thigh_r - s.theta5;
  return a;
}

LinkAngles link_rates(const MechanismState& s, const JointVelocities& r) {
  LinkAngles a;
  a.thigh_l = s.omega1 + r.left_hip;
  a.shank_l = a.thigh_l + r.left_knee;
  a.thigh_r = s.omega1 - r.right_hip;
  a.shank_r = a.thigh_r - r.right_knee;
  return a;
}

// Per-body position/velocity relative to the hip, plus absolute angular rates.
// Sums over bodies group left/right pairs first so mirroring only permutes
// operands of commutative additions (mirrored runs stay bit-identical).
struct RelKinematics {
  Vec2 thigh_l, thigh_r, shank_l, shank_r;          // COM positions rel. hip
  Vec2 knee_l, knee_r, foot_l, foot_r;
  Vec2 d_thigh_l, d_thigh_r, d_shank_l, d_shank_r;  // COM velocities rel. hip
  Vec2 d_foot_l, d_foot_r;
  LinkAngles rates;
  Vec2 com;    // mechanism COM rel. hip (hip link sits at the hip itself)
  Vec2 d_com;
};

RelKinematics rel_kinematics(const MechanismState& s, const Geometry& g,
                             double omega1, const JointVelocities& r) {
  const LinkAngles a = link_angles(s);
  MechanismState tmp = s;
  tmp.omega1 = omega1;
  const LinkAngles w = link_rates(tmp, r);

  RelKinematics k;
  k.rates = w;
  k.thigh_l = 0.5 * g.l1 * dir(a.thigh_l);
  k.thigh_r = 0.5 * g.l1 * dir(a.thigh_r);
  k.knee_l = g.l1 * dir(a.thigh_l);
  k.knee_r = g.l1 * dir(a.thigh_r);
  k.shank_l = k.knee_l + 0.5 * g.l2 * dir(a.shank_l);
  k.shank_r = k.knee_r + 0.5 * g.l2 * dir(a.shank_r);
  k.foot_l = k.knee_l + g.l2 * dir(a.shank_l);
  k.foot_r = k.knee_r + g.l2 * dir(a.shank_r);

  const Vec2 d_knee_l = g.l1 * w.thigh_l * dir_rate(a.thigh_l);
  const Vec2 d_knee_r = g.l1 * w.thigh_r * dir_rate(a.thigh_r);
  k.d_thigh_l = 0.5 * g.l1 * w.thigh_l * dir_rate(a.thigh_l);
  k.d_thigh_r = 0.5 * g.l1 * w.thigh_r * dir_rate(a.thigh_r);
  k.d_shank_l = d_knee_l + 0.5 * g.l2 * w.shank_l * dir_rate(a.shank_l);
  k.d_shank_r = d_knee_r + 0.5 * g.l2 * w.shank_r * dir_rate(a.shank_r);
  k.d_foot_l = d_knee_l + g.l2 * w.shank_l * dir_rate(a.shank_l);
  k.d_foot_r = d_knee_r + g.l2 * w.shank_r * dir_rate(a.shank_r);

  const double inv_m = 1.0 / g.total_mass();
  k.com = inv_m * (g.m1 * (k.thigh_l + k.thigh_r) + g.m2 * (k.shank_l + k.shank_r));
  k.d_com = inv_m * (g.m1 * (k.d_thigh_l + k.d_thigh_r) + g.m2 * (k.d_shank_l + k.d_shank_r));
  return k;
}

// Angular momentum about the mechanism COM for the given base rate and
// prescribed joint rates; thin-rod link inertias. Affine in the rates, which
// step_mechanism exploits to split it into inertia * omega1 + internal part.
double angular_momentum(const RelKinematics& k, const Geometry& g) {
  const double rod_t = g.m1 * g.l1 * g.l1 / 12.0;
  const double rod_s = g.m2 * g.l2 * g.l2 / 12.0;
  double L = rod_t * (k.rates.thigh_l + k.rates.thigh_r) + rod_s * (k.rates.shank_l + k.rates.shank_r);
  L += g.m * cross(Vec2{} - k.com, Vec2{} - k.d_com);
  L += g.m1 * (cross(k.thigh_l - k.com, k.d_thigh_l - k.d_com) +
               cross(k.thigh_r - k.com, k.d_thigh_r - k.d_com));
  L += g.m2 * (cross(k.shank_l - k.com, k.d_shank_l - k.d_com) +
               cross(k.shank_r - k.com, k.d_shank_r - k.d_com));
  return L;
}

double clamp_joint(double value, double lo, double hi, long& clamp_events) {
  if (value < lo) {
    ++clamp_events;
    return lo;
  }
  if (value > hi) {
    ++clamp_events;
    return hi;
  }
  return value;
}

}  // namespace

void Geometry::validate() const {
  if (!(m > 0.0 && m1 > 0.0 && m2 > 0.0 && l1 > 0.0 && l2 > 0.0)) {
    throw ValidationError("geometry fields must all be > 0");
  }
}

void ContactModel::validate() const {
  if (!(k_g > 0.0 && b_g > 0.0)) throw ValidationError("k_g and b_g must be > 0");
  if (!(k_anchor >= 0.0 && b_anchor >= 0.0 && mu >= 0.0)) {
    throw ValidationError("anchor constants and mu must be >= 0");
  }
}

double GroundProfile::eval(double x) const {
  switch (kind) {
    case Kind::Flat:
      return 0.0;
    case Kind::Slope:
      return x * std::tan(slope_angle);
    case Kind::Fourier: {
      double y = 0.0;
      for (size_t k = 0; k < sin_coeffs.size(); ++k) y += sin_coeffs[k] * std::sin((k + 1) * omega * x);
      for (size_t k = 0; k < cos_coeffs.size(); ++k) y += cos_coeffs[k] * std::cos((k + 1) * omega * x);
      return y;
    }
  }
  return 0.0;
}

bool MechanismState::finite() const {
  for (double v : {hip_x, hip_y, hip_vx, hip_vy, theta1, theta2, theta3, theta4, theta5, omega1,
                   left_anchor_x, right_anchor_x}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Kinematics forward_kinematics(const MechanismState& s, const Geometry& g) {
  const RelKinematics k = rel_kinematics(s, g, s.omega1, {});
  const Vec2 hip{s.hip_x, s.hip_y};
  Kinematics out;
  out.hip = hip;
  out.left_knee = hip + k.knee_l;
  out.right_knee = hip + k.knee_r;
  out.left_foot = hip + k.foot_l;
  out.right_foot = hip + k.foot_r;
  out.left_thigh_com = hip + k.thigh_l;
  out.right_thigh_com = hip + k.thigh_r;
  out.left_shank_com = hip + k.shank_l;
  out.right_shank_com = hip + k.shank_r;
  out.com = hip + k.com;
  return out;
}

ContactForce contact_forces(Vec2 foot_pos, Vec2 foot_vel, double anchor_x,
                            const GroundProfile& profile, const ContactModel& cm) {
  const double ground_y = profile.eval(foot_pos.x);
  if (foot_pos.y > ground_y) return {};

  const double penetration = ground_y - foot_pos.y;
  const double normal = std::max(0.0, cm.k_g * penetration - cm.b_g * foot_vel.y);
  const double raw_tangent = -cm.k_anchor * (foot_pos.x - anchor_x) - cm.b_anchor * foot_vel.x;
  const double cap = cm.mu * normal;
  const double tangent = std::clamp(raw_tangent, -cap, cap);
  return {{tangent, normal}, true};
}

void step_mechanism(MechanismState& s, const JointVelocities& rates, const Geometry& geom,
                    const ContactModel& cm, const GroundProfile& profile, double g, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");

  // Prescribed joints advance kinematically, then clamp to travel limits.
  // Post-clamp effective rates feed the velocity and momentum bookkeeping.
  MechanismState next = s;
  next.theta2 = clamp_joint(s.theta2 + rates.left_hip * dt, kHipMin, kHipMax, next.clamp_events);
  next.theta3 = clamp_joint(s.theta3 + rates.right_hip * dt, kHipMin, kHipMax, next.clamp_events);
  next.theta4 = clamp_joint(s.theta4 + rates.left_knee * dt, kKneeMin, kKneeMax, next.clamp_events);
  next.theta5 = clamp_joint(s.theta5 + rates.right_knee * dt, kKneeMin, kKneeMax, next.clamp_events);
  JointVelocities eff;
  eff.left_hip = (next.theta2 - s.theta2) / dt;
  eff.right_hip = (next.theta3 - s.theta3) / dt;
  eff.left_knee = (next.theta4 - s.theta4) / dt;
  eff.right_knee = (next.theta5 - s.theta5) / dt;

  const RelKinematics old_kin = rel_kinematics(s, geom, s.omega1, eff);
  const Vec2 hip{s.hip_x, s.hip_y};
  const Vec2 hip_vel{s.hip_vx, s.hip_vy};
  const Vec2 foot_l = hip + old_kin.foot_l;
  const Vec2 foot_r = hip + old_kin.foot_r;
  const Vec2 foot_vl = hip_vel + old_kin.d_foot_l;
  const Vec2 foot_vr = hip_vel + old_kin.d_foot_r;

  const double anchor_l = s.left_contact ? s.left_anchor_x : foot_l.x;
  const double anchor_r = s.right_contact ? s.right_anchor_x : foot_r.x;
  const ContactForce cf_l = contact_forces(foot_l, foot_vl, anchor_l, profile, cm);
  const ContactForce cf_r = contact_forces(foot_r, foot_vr, anchor_r, profile, cm);

  const double mass = geom.total_mass();
  const Vec2 f_total = Vec2{0.0, -mass * g} + (cf_l.force + cf_r.force);
  const Vec2 a_com = (1.0 / mass) * f_total;
  const double torque = cross(old_kin.foot_l - old_kin.com, cf_l.force) +
                        cross(old_kin.foot_r - old_kin.com, cf_r.force);

  // Momentum balance about the COM: L = A * omega1 + B(angles, joint rates).
  const double A_old = angular_momentum(rel_kinematics(s, geom, 1.0, {}), geom);
  const double B_old = angular_momentum(rel_kinematics(s, geom, 0.0, eff), geom);

  MechanismState pred = next;  // joints advanced, theta1 predicted explicitly
  pred.theta1 = s.theta1 + s.omega1 * dt;
  const double A_new = angular_momentum(rel_kinematics(pred, geom, 1.0, {}), geom);
  const double B_new = angular_momentum(rel_kinematics(pred, geom, 0.0, eff), geom);
  next.omega1 = (A_old * s.omega1 + B_old + torque * dt - B_new) / A_new;
  next.theta1 = s.theta1 + next.omega1 * dt;

  // COM translation (exact for constant acceleration); hip follows the COM.
  const Vec2 com = hip + old_kin.com;
  const Vec2 v_com = hip_vel + old_kin.d_com;
  const Vec2 com_new = com + dt * v_com + (0.5 * dt * dt) * a_com;
  const Vec2 v_com_new = v_com + dt * a_com;

  const RelKinematics new_kin = rel_kinematics(next, geom, next.omega1, eff);
  const Vec2 hip_new = com_new - new_kin.com;
  const Vec2 hip_vel_new = v_com_new - new_kin.d_com;
  next.hip_x = hip_new.x;
  next.hip_y = hip_new.y;
  next.hip_vx = hip_vel_new.x;
  next.hip_vy = hip_vel_new.y;

  // Contact flags track the new foot heights; anchors latch on touchdown.
  const Vec2 nf_l = hip_new + new_kin.foot_l;
  const Vec2 nf_r = hip_new + new_kin.foot_r;
  const bool pen_l = nf_l.y <= profile.eval(nf_l.x);
  const bool pen_r = nf_r.y <= profile.eval(nf_r.x);
  if (pen_l && !s.left_contact) next.left_anchor_x = nf_l.x;
  if (pen_r && !s.right_contact) next.right_anchor_x = nf_r.x;
  next.left_contact = pen_l;
  next.right_contact = pen_r;

  ++next.steps;
  if (!next.finite()) throw IntegrationError("mechanism state diverged", next.steps);
  s = next;
}

bool detect_fall(const MechanismState& s, const Geometry& geom, const GroundProfile& profile) {
  const double height = s.hip_y - profile.eval(s.hip_x);
  return height < 0.5 * geom.leg_length() || std::fabs(s.theta1) > M_PI / 3.0;
}

MechanismState mirrored(const MechanismState& s) {
  MechanismState m = s;
  m.hip_x = -s.hip_x;
  m.hip_vx = -s.hip_vx;
  m.theta1 = -s.theta1;
  m.theta2 = s.theta3;
  m.theta3 = s.theta2;
  m.theta4 = s.theta5;
  m.theta5 = s.theta4;
  m.omega1 = -s.omega1;
  m.left_contact = s.right_contact;
  m.right_contact = s.left_contact;
  m.left_anchor_x = -s.right_anchor_x;
  m.right_anchor_x = -s.left_anchor_x;
  return m;
}

}  // namespace walker::mech
