#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "walker/mechanism.hpp"

using namespace walker;
using mech::Vec2;

namespace {

mech::MechanismState upright_state(double hip_y) {
  mech::MechanismState s;
  s.hip_y = hip_y;
  return s;  // theta2 = theta3 = pi, theta4 = theta5 = 0: both legs straight down
}

}  // namespace

TEST_CASE("forward kinematics: straight-down pose puts feet directly under the hip") {
  const mech::Geometry geom;
  const auto k = forward_kinematics(upright_state(0.2), geom);

  CHECK(k.hip.x == doctest::Approx(0.0));
  CHECK(k.hip.y == doctest::Approx(0.2));
  CHECK(k.left_knee.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.left_knee.y == doctest::Approx(0.12));
  CHECK(k.left_foot.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.left_foot.y == doctest::Approx(0.04));
  CHECK(k.right_foot.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.right_foot.y == doctest::Approx(0.04));
}

TEST_CASE("forward kinematics: left hip at pi/2 swings the left knee forward") {
  const mech::Geometry geom;
  auto s = upright_state(0.0);
  s.theta2 = M_PI / 2.0;  // left thigh absolute angle pi/2 => horizontal, +x
  const auto k = forward_kinematics(s, geom);

  CHECK(k.left_knee.x == doctest::Approx(geom.l1));
  CHECK(k.left_knee.y == doctest::Approx(0.0).epsilon(1e-12));
  // The right leg is untouched.
  CHECK(k.right_foot.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.right_foot.y == doctest::Approx(-geom.leg_length()));
}

TEST_CASE("forward kinematics: knee flexion folds the left foot back, the right foot forward") {
  const mech::Geometry geom;

  auto s = upright_state(0.0);
  s.theta4 = M_PI / 2.0;
  auto k = forward_kinematics(s, geom);
  CHECK(k.left_foot.x == doctest::Approx(-geom.l2));
  CHECK(k.left_foot.y == doctest::Approx(-geom.l1));

  s = upright_state(0.0);
  s.theta5 = M_PI / 2.0;
  k = forward_kinematics(s, geom);
  CHECK(k.right_foot.x == doctest::Approx(geom.l2));
  CHECK(k.right_foot.y == doctest::Approx(-geom.l1));
}

TEST_CASE("forward kinematics: COM is the mass-weighted average of the link COMs") {
  const mech::Geometry geom;

  // Straight-down pose, by hand: thigh COMs at -l1/2, shank COMs at -(l1+l2/2).
  auto k = forward_kinematics(upright_state(0.0), geom);
  CHECK(k.com.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.com.y == doctest::Approx(-0.036));

  // General pose: recombine the reported link COMs and compare.
  mech::MechanismState s;
  s.hip_x = 0.3;
  s.hip_y = 0.17;
  s.theta1 = 0.2;
  s.theta2 = 2.9;
  s.theta3 = 3.4;
  s.theta4 = 0.4;
  s.theta5 = 0.1;
  k = forward_kinematics(s, geom);
  const double m_total = geom.total_mass();
  const Vec2 com = (1.0 / m_total) *
                   (geom.m * k.hip + geom.m1 * (k.left_thigh_com + k.right_thigh_com) +
                    geom.m2 * (k.left_shank_com + k.right_shank_com));
  CHECK(k.com.x == doctest::Approx(com.x).epsilon(1e-12));
  CHECK(k.com.y == doctest::Approx(com.y).epsilon(1e-12));
  // Link COMs sit mid-segment.
  const Vec2 mid_thigh = 0.5 * (k.hip + k.left_knee);
  CHECK(k.left_thigh_com.x == doctest::Approx(mid_thigh.x).epsilon(1e-12));
  CHECK(k.left_thigh_com.y == doctest::Approx(mid_thigh.y).epsilon(1e-12));
  const Vec2 mid_shank = 0.5 * (k.right_knee + k.right_foot);
  CHECK(k.right_shank_com.x == doctest::Approx(mid_shank.x).epsilon(1e-12));
  CHECK(k.right_shank_com.y == doctest::Approx(mid_shank.y).epsilon(1e-12));
}

TEST_CASE("mirroring the state reflects every kinematic point about the vertical") {
  const mech::Geometry geom;
  mech::MechanismState s;
  s.hip_x = 0.12;
  s.hip_y = 0.15;
  s.theta1 = -0.3;
  s.theta2 = 2.7;
  s.theta3 = 3.5;
  s.theta4 = 0.8;
  s.theta5 = 0.2;
  const auto k = forward_kinematics(s, geom);
  const auto km = forward_kinematics(mech::mirrored(s), geom);

  CHECK(km.hip.x == doctest::Approx(-k.hip.x).epsilon(1e-12));
  CHECK(km.hip.y == doctest::Approx(k.hip.y).epsilon(1e-12));
  CHECK(km.left_foot.x == doctest::Approx(-k.right_foot.x).epsilon(1e-12));
  CHECK(km.left_foot.y == doctest::Approx(k.right_foot.y).epsilon(1e-12));
  CHECK(km.right_knee.x == doctest::Approx(-k.left_knee.x).epsilon(1e-12));
  CHECK(km.right_knee.y == doctest::Approx(k.left_knee.y).epsilon(1e-12));
  CHECK(km.com.x == doctest::Approx(-k.com.x).epsilon(1e-12));
  CHECK(km.com.y == doctest::Approx(k.com.y).epsilon(1e-12));
  // Mirroring twice is the identity.
  const auto s2 = mech::mirrored(mech::mirrored(s));
  CHECK(s2.hip_x == s.hip_x);
  CHECK(s2.theta2 == s.theta2);
  CHECK(s2.theta5 == s.theta5);
}

TEST_CASE("ground profiles evaluate flat, sloped, and Fourier-series terrain") {
  CHECK(mech::GroundProfile::flat().eval(3.7) == 0.0);

  const auto slope = mech::GroundProfile::slope(5.0 * M_PI / 180.0);
  CHECK(slope.eval(1.0) == doctest::Approx(std::tan(5.0 * M_PI / 180.0)).epsilon(1e-12));
  CHECK(slope.eval(-2.0) == doctest::Approx(-2.0 * std::tan(5.0 * M_PI / 180.0)).epsilon(1e-12));

  const auto bumpy = mech::GroundProfile::fourier(2.0, {0.3, 0.1}, {0.05});
  for (double x : {0.0, 0.4, 1.3, -0.7}) {
    const double expect = 0.3 * std::sin(2.0 * x) + 0.1 * std::sin(4.0 * x) + 0.05 * std::cos(2.0 * x);
    CHECK(bumpy.eval(x) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("contact forces: spring-damper normal with anchored tangential friction") {
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  SUBCASE("no force above the ground") {
    const auto cf = mech::contact_forces({0.0, 0.001}, {0.0, -1.0}, 0.0, flat, cm);
    CHECK_FALSE(cf.in_contact);
    CHECK(cf.force.x == 0.0);
    CHECK(cf.force.y == 0.0);
  }

  SUBCASE("penetrating, descending foot: k_g*d - b_g*vy") {
    const auto cf = mech::contact_forces({0.0, -0.002}, {0.0, -0.1}, 0.0, flat, cm);
    CHECK(cf.in_contact);
    CHECK(cf.force.y == doctest::Approx(5000.0 * 0.002 + 50.0 * 0.1));  // 15 N
    CHECK(cf.force.x == doctest::Approx(0.0));
  }

  SUBCASE("no adhesion: a fast-rising foot exerts zero normal force") {
    const auto cf = mech::contact_forces({0.0, -0.001}, {0.0, 1.0}, 0.0, flat, cm);
    CHECK(cf.in_contact);
    CHECK(cf.force.y == 0.0);
    CHECK(cf.force.x == 0.0);  // friction cap mu*N is zero too
  }

  SUBCASE("tangential force is capped at mu times the normal force") {
    // Raw tangent -5000*0.01 - 50*0.5 = -75 N against a 10 N normal.
    const auto cf = mech::contact_forces({0.01, -0.002}, {0.5, 0.0}, 0.0, flat, cm);
    CHECK(cf.force.y == doctest::Approx(10.0));
    CHECK(cf.force.x == doctest::Approx(-cm.mu * 10.0));
  }

  SUBCASE("small anchor offset stays below the cap") {
    // Raw tangent -5000*(-1e-4) = 0.5 N, cap mu*10 = well above.
    const auto cf = mech::contact_forces({-1e-4, -0.002}, {0.0, 0.0}, 0.0, flat, cm);
    CHECK(cf.force.x == doctest::Approx(0.5));
  }

  SUBCASE("sloped terrain shifts the contact threshold") {
    const auto slope = mech::GroundProfile::slope(5.0 * M_PI / 180.0);
    const double gy = slope.eval(0.5);
    CHECK_FALSE(mech::contact_forces({0.5, gy + 1e-6}, {}, 0.5, slope, cm).in_contact);
    CHECK(mech::contact_forces({0.5, gy - 1e-6}, {}, 0.5, slope, cm).in_contact);
  }
}

TEST_CASE("airborne mechanism: COM follows the ballistic parabola") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();
  const double g = 9.81;
  const double dt = 1e-3;

  auto s = upright_state(1.0);
  s.hip_vx = 0.4;
  s.hip_vy = 0.3;
  const auto k0 = forward_kinematics(s, geom);
  const double x0 = k0.com.x, y0 = k0.com.y;

  SUBCASE("rigid pose: hip matches the parabola exactly") {
    for (int i = 0; i < 200; ++i) step_mechanism(s, {}, geom, cm, flat, g, dt);
    const double t = 200 * dt;
    const auto k = forward_kinematics(s, geom);
    CHECK(k.com.x == doctest::Approx(x0 + 0.4 * t).epsilon(1e-9));
    CHECK(k.com.y == doctest::Approx(oracle::parabola_y(y0, 0.3, g, t)).epsilon(1e-9));
    // With frozen joints the hip is rigidly offset from the COM.
    CHECK(s.hip_y == doctest::Approx(oracle::parabola_y(1.0, 0.3, g, t)).epsilon(1e-6));
    CHECK(s.theta1 == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("flailing joints: COM acceleration is exactly gravity") {
    // Commanding joint rates shifts the COM velocity (the joints are velocity
    // sources), but in flight the COM path must still be a gravity parabola:
    // zero second difference in x, -g*dt^2 in y per step.
    mech::JointVelocities rates{1.5, -2.0, 0.8, 1.2};
    const auto com_at = [&](const mech::MechanismState& st) {
      return forward_kinematics(st, geom).com;
    };
    Vec2 prev2 = com_at(s);
    step_mechanism(s, rates, geom, cm, flat, g, dt);
    Vec2 prev1 = com_at(s);
    for (int i = 0; i < 199; ++i) {
      step_mechanism(s, rates, geom, cm, flat, g, dt);
      const Vec2 cur = com_at(s);
      CHECK(cur.x - 2.0 * prev1.x + prev2.x == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(cur.y - 2.0 * prev1.y + prev2.y == doctest::Approx(-g * dt * dt).epsilon(1e-9));
      prev2 = prev1;
      prev1 = cur;
    }
    (void)x0;
    (void)y0;
  }
}

TEST_CASE("standing start at equilibrium penetration stays at rest") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();
  const double g = 9.81;
  const double dt = 1e-3;

  // Both feet share the weight: k_g * d = M*g/2 per foot.
  const double depth = geom.total_mass() * g / (2.0 * cm.k_g);
  auto s = upright_state(geom.leg_length() - depth);
  s.left_contact = s.right_contact = true;

  for (int i = 0; i < 2000; ++i) step_mechanism(s, {}, geom, cm, flat, g, dt);

  CHECK(std::fabs(s.hip_vx) < 1e-4);
  CHECK(std::fabs(s.hip_vy) < 1e-4);
  CHECK(std::fabs(s.omega1) < 1e-4);
  CHECK(s.hip_y == doctest::Approx(geom.leg_length() - depth).epsilon(1e-3));
  CHECK(s.left_contact);
  CHECK(s.right_contact);
  CHECK_FALSE(mech::detect_fall(s, geom, flat));
}

TEST_CASE("dropped mechanism settles onto the ground without sinking through") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  auto s = upright_state(geom.leg_length() + 0.001);
  for (int i = 0; i < 3000; ++i) step_mechanism(s, {}, geom, cm, flat, 9.81, 1e-3);

  CHECK(s.left_contact);
  CHECK(s.right_contact);
  CHECK(std::fabs(s.hip_vy) < 1e-3);
  CHECK(s.hip_y > 0.9 * geom.leg_length());
  CHECK(s.hip_y < geom.leg_length() + 0.001);
}

TEST_CASE("prescribed joints integrate their commanded rates exactly") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  auto s = upright_state(1.0);  // airborne so contact cannot interfere
  mech::JointVelocities rates{0.3, -0.2, 0.5, 0.25};
  const int n = 500;
  for (int i = 0; i < n; ++i) step_mechanism(s, rates, geom, cm, flat, 9.81, 1e-3);
  const double t = n * 1e-3;

  CHECK(s.theta2 == doctest::Approx(M_PI + 0.3 * t).epsilon(1e-12));
  CHECK(s.theta3 == doctest::Approx(M_PI - 0.2 * t).epsilon(1e-12));
  CHECK(s.theta4 == doctest::Approx(0.5 * t).epsilon(1e-12));
  CHECK(s.theta5 == doctest::Approx(0.25 * t).epsilon(1e-12));
  CHECK(s.clamp_events == 0);
  CHECK(s.steps == n);
}

TEST_CASE("joint travel limits clamp and are counted") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  auto s = upright_state(1.0);
  // Drive the left knee hard into its lower stop.
  mech::JointVelocities rates;
  rates.left_knee = -10.0;
  for (int i = 0; i < 100; ++i) step_mechanism(s, rates, geom, cm, flat, 9.81, 1e-3);
  CHECK(s.theta4 == mech::kKneeMin);
  CHECK(s.clamp_events == 100);

  // Hips clamp at both ends of their +-90 deg span.
  rates = {};
  rates.left_hip = 100.0;
  rates.right_hip = -100.0;
  for (int i = 0; i < 200; ++i) step_mechanism(s, rates, geom, cm, flat, 9.81, 1e-3);
  CHECK(s.theta2 == mech::kHipMax);
  CHECK(s.theta3 == mech::kHipMin);
}

TEST_CASE("fall detection: low hip or excessive lean, measured over local ground") {
  const mech::Geometry geom;
  const auto flat = mech::GroundProfile::flat();

  auto s = upright_state(0.5 * geom.leg_length() + 1e-4);
  CHECK_FALSE(mech::detect_fall(s, geom, flat));
  s.hip_y = 0.5 * geom.leg_length() - 1e-4;
  CHECK(mech::detect_fall(s, geom, flat));

  s = upright_state(geom.leg_length());
  s.theta1 = M_PI / 3.0 - 1e-4;
  CHECK_FALSE(mech::detect_fall(s, geom, flat));
  s.theta1 = -(M_PI / 3.0 + 1e-4);
  CHECK(mech::detect_fall(s, geom, flat));

  // On a slope the hip height is taken relative to the terrain under the hip.
  const auto slope = mech::GroundProfile::slope(5.0 * M_PI / 180.0);
  s = upright_state(geom.leg_length());
  s.hip_x = 2.0;
  CHECK(mech::detect_fall(s, geom, slope));  // terrain rose ~0.175 m under it
  s.hip_y = slope.eval(2.0) + geom.leg_length();
  CHECK_FALSE(mech::detect_fall(s, geom, slope));
}

TEST_CASE("touchdown latches the tangential anchor at the first contact point") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  auto s = upright_state(geom.leg_length() + 0.002);
  s.hip_vx = 0.5;  // drifting forward while falling
  while (!s.left_contact) step_mechanism(s, {}, geom, cm, flat, 9.81, 1e-3);

  const double anchor = s.left_anchor_x;
  const auto k = forward_kinematics(s, geom);
  CHECK(anchor == doctest::Approx(k.left_foot.x).epsilon(1e-6));

  // While contact persists, the anchor must not follow the sliding foot.
  for (int i = 0; i < 50 && s.left_contact; ++i) step_mechanism(s, {}, geom, cm, flat, 9.81, 1e-3);
  CHECK(s.left_anchor_x == anchor);
}

TEST_CASE("parameter validation and integration blowup are reported as errors") {
  mech::Geometry geom;
  CHECK_NOTHROW(geom.validate());
  geom.l1 = 0.0;
  CHECK_THROWS_AS(geom.validate(), ValidationError);

  mech::ContactModel cm;
  CHECK_NOTHROW(cm.validate());
  cm.mu = -0.1;
  CHECK_THROWS_AS(cm.validate(), ValidationError);
  cm = {};
  cm.k_g = 0.0;
  CHECK_THROWS_AS(cm.validate(), ValidationError);

  auto s = upright_state(1.0);
  CHECK_THROWS_AS(step_mechanism(s, {}, mech::Geometry{}, mech::ContactModel{},
                                 mech::GroundProfile::flat(), 9.81, 0.0),
                  ValidationError);

  // A foot buried astronomically deep produces a non-finite contact force.
  s = upright_state(-1e305);
  CHECK_THROWS_AS(step_mechanism(s, {}, mech::Geometry{}, mech::ContactModel{},
                                 mech::GroundProfile::flat(), 9.81, 1e-3),
                  IntegrationError);
}

TEST_CASE("stepping is mirror-equivariant: reflect, step, reflect equals step") {
  const mech::Geometry geom;
  const mech::ContactModel cm;
  const auto flat = mech::GroundProfile::flat();

  mech::MechanismState s;
  s.hip_x = 0.05;
  s.hip_y = 0.158;
  s.hip_vx = 0.2;
  s.theta1 = 0.1;
  s.theta2 = 3.0;
  s.theta3 = 3.3;
  s.theta4 = 0.2;
  s.theta5 = 0.05;
  s.omega1 = -0.4;

  mech::MechanismState m = mech::mirrored(s);
  const mech::JointVelocities rates{0.7, -0.3, 0.2, 0.9};
  const mech::JointVelocities mrates{-0.3, 0.7, 0.9, 0.2};  // sides swapped

  for (int i = 0; i < 400; ++i) {
    step_mechanism(s, rates, geom, cm, flat, 9.81, 1e-3);
    step_mechanism(m, mrates, geom, cm, flat, 9.81, 1e-3);
  }
  const auto sm = mech::mirrored(s);
  CHECK(m.hip_x == doctest::Approx(sm.hip_x).epsilon(1e-12));
  CHECK(m.hip_y == doctest::Approx(sm.hip_y).epsilon(1e-12));
  CHECK(m.theta1 == doctest::Approx(sm.theta1).epsilon(1e-12));
  CHECK(m.theta2 == doctest::Approx(sm.theta2).epsilon(1e-12));
  CHECK(m.theta3 == doctest::Approx(sm.theta3).epsilon(1e-12));
  CHECK(m.omega1 == doctest::Approx(sm.omega1).epsilon(1e-12));
  CHECK(m.left_contact == sm.left_contact);
  CHECK(m.right_contact == sm.right_contact);
}
