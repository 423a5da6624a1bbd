#pragma once

#include <cmath>
#include <vector>

#include "walker/errors.hpp"

namespace walker::mech {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Point-mass hip link plus thigh/shank rods per leg; rod COM at half length.
struct Geometry {
  double m = 0.10;   // hip link mass [kg]
  double m1 = 0.03;  // thigh mass [kg]
  double l1 = 0.08;  // thigh length [m]
  double m2 = 0.02;  // shank mass [kg]
  double l2 = 0.08;  // shank length [m]

  double total_mass() const { return m + 2.0 * (m1 + m2); }
  double leg_length() const { return l1 + l2; }
  void validate() const;
};

struct GroundProfile {
  enum class Kind { Flat, Slope, Fourier };
  Kind kind = Kind::Flat;
  double slope_angle = 0.0;  // [rad], Slope only
  double omega = 0.0;        // fundamental spatial frequency, Fourier only
  std::vector<double> sin_coeffs;  // a_k * sin(k*omega*x)
  std::vector<double> cos_coeffs;  // b_k * cos(k*omega*x)

  double eval(double x) const;

  static GroundProfile flat() { return {}; }
  static GroundProfile slope(double angle_rad) {
    GroundProfile g;
    g.kind = Kind::Slope;
    g.slope_angle = angle_rad;
    return g;
  }
  static GroundProfile fourier(double omega, std::vector<double> sin_coeffs,
                               std::vector<double> cos_coeffs) {
    GroundProfile g;
    g.kind = Kind::Fourier;
    g.omega = omega;
    g.sin_coeffs = std::move(sin_coeffs);
    g.cos_coeffs = std::move(cos_coeffs);
    return g;
  }
};

struct ContactModel {
  double k_g = 5000.0;      // vertical ground elasticity [N/m]
  double b_g = 50.0;        // vertical ground damping [N*s/m]
  double k_anchor = 5000.0; // horizontal anchor stiffness [N/m]
  double b_anchor = 50.0;   // horizontal anchor damping [N*s/m]
  double mu = 0.3;          // Coulomb-like bound on tangential force (hard feet on smooth ground)

  void validate() const;
};

struct ContactForce {
  Vec2 force{};          // [N]
  bool in_contact = false;
};

// Spring/damper vertical force (no adhesion: N >= 0) plus tangential
// spring-damper to the touchdown anchor capped at mu*N.
ContactForce contact_forces(Vec2 foot_pos, Vec2 foot_vel, double anchor_x,
                            const GroundProfile& profile, const ContactModel& cm);

// Joint travel limits: hips swing +-90 deg about straight-down (theta = pi),
// knees fold one way over a 90 deg span.
constexpr double kHipMin = M_PI / 2.0;
constexpr double kHipMax = 3.0 * M_PI / 2.0;
constexpr double kKneeMin = 0.0;
constexpr double kKneeMax = M_PI / 2.0;

// Angle conventions (the repo's convention test vector lives in the FK tests):
//  theta1      - Link 1 orientation from vertical
//  theta2/3    - left/right thigh relative to Link 1; pi = straight down
//  theta4/5    - left/right shank relative to its thigh; 0 = straight
// Absolute angles from vertical: left thigh = theta1+theta2, left shank adds
// theta4; the right leg uses the mirrored sense, theta1-theta3 and -theta5,
// so swapping (theta2,theta4)<->(theta3,theta5) and negating theta1 reflects
// the mechanism about the vertical through the hip.
struct MechanismState {
  double hip_x = 0.0, hip_y = 0.0;
  double hip_vx = 0.0, hip_vy = 0.0;
  double theta1 = 0.0;
  double theta2 = M_PI, theta3 = M_PI;
  double theta4 = 0.0, theta5 = 0.0;
  double omega1 = 0.0;
  bool left_contact = false, right_contact = false;
  double left_anchor_x = 0.0, right_anchor_x = 0.0;
  long clamp_events = 0;  // cumulative joint-range clamp count
  long steps = 0;

  bool finite() const;
};

struct Kinematics {
  Vec2 hip, left_knee, right_knee, left_foot, right_foot;
  Vec2 left_thigh_com, right_thigh_com, left_shank_com, right_shank_com;
  Vec2 com;  // whole-mechanism center of mass
};

Kinematics forward_kinematics(const MechanismState& state, const Geometry& geom);

// Prescribed angular speeds [rad/s], already clamped by the coupling layer.
struct JointVelocities {
  double left_hip = 0.0;    // d(theta2)/dt
  double right_hip = 0.0;   // d(theta3)/dt
  double left_knee = 0.0;   // d(theta4)/dt
  double right_knee = 0.0;  // d(theta5)/dt
};

// Advances one shared timestep: joints kinematically (then range-clamped),
// base DOF (hip translation + theta1) by force/moment balance about the COM
// with contact and gravity. Throws IntegrationError on blowup.
void step_mechanism(MechanismState& state, const JointVelocities& rates, const Geometry& geom,
                    const ContactModel& cm, const GroundProfile& profile, double g, double dt);

// Early-termination predicate: hip too low over local ground or leaning too far.
bool detect_fall(const MechanismState& state, const Geometry& geom, const GroundProfile& profile);

// Reflection about the vertical through the hip (travel direction reverses).
MechanismState mirrored(const MechanismState& state);

}  // namespace walker::mech
