#pragma once

#include <cmath>

#include "kicksim/dynamics.hpp"

namespace kicksim {

/// Position command. Velocity defaults to zero (pure position replay)
/// and yaw is held at zero for the planar task.
struct Setpoint {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double yaw = 0.0;
};

struct GeometricGains {
    Vec3 k_position;     // 1/s^2
    Vec3 k_velocity;     // 1/s
    Vec3 k_rotation;     // N*m
    Vec3 k_angular_rate; // N*m*s

    // Tuned against the closed-loop step and sinusoid tests. The position
    // loop is deliberately stiff with light velocity damping: with pure
    // position commands (no feedforward) the 1 Hz tracking error scales as
    // |s(s + k_v)| / |s^2 + k_v s + k_p|, so a high k_p and a modest k_v
    // keep the lag small without saturating the limited differential
    // rotor-moment authority (about l*m*g/2 at hover thrust).
    static GeometricGains defaults() {
        GeometricGains g;
        g.k_position = Vec3(260.0, 260.0, 160.0);
        g.k_velocity = Vec3(12.0, 12.0, 25.0);
        g.k_rotation = Vec3(0.04, 0.04, 0.03);
        g.k_angular_rate = Vec3(1.0e-3, 1.0e-3, 1.2e-3);
        return g;
    }
};

struct PidGains {
    Vec3 position_kp, position_ki, position_kd;
    Vec3 attitude_kp;
    Vec3 rate_kp, rate_ki, rate_kd;
    Vec3 integrator_limit;

    // The tight integrator limit is deliberate anti-windup: with a larger
    // limit the position integral saturates during a step transient and
    // then unwinds at only ki*|e| per second, leaving a centimetre-scale
    // offset that takes minutes to bleed off.
    static PidGains defaults() {
        PidGains g;
        g.position_kp = Vec3(14.0, 14.0, 16.0);
        g.position_ki = Vec3(2.0, 2.0, 2.0);
        g.position_kd = Vec3(7.0, 7.0, 8.0);
        g.attitude_kp = Vec3(35.0, 35.0, 15.0);
        g.rate_kp = Vec3(9e-4, 9e-4, 4e-4);
        g.rate_ki = Vec3(2e-4, 2e-4, 1e-4);
        g.rate_kd = Vec3(0.0, 0.0, 0.0);
        g.integrator_limit = Vec3(0.005, 0.005, 0.005);
        return g;
    }
};

/// Discrete-time PID memory, threaded explicitly through each call.
struct ControllerState {
    Vec3 position_integrator = Vec3::Zero();
    Vec3 rate_integrator = Vec3::Zero();
    Vec3 previous_error = Vec3::Zero();
    Vec3 previous_rate_error = Vec3::Zero();
    bool has_previous = false;
};

struct ControlResult {
    ControlWrench wrench;
    bool thrust_clamped = false;
    bool degenerate = false; // desired force vanished; wrench is the previous one
};

/// Geometric tracking controller on SE(3): thrust from the desired force
/// vector projected on the current body z axis, moments from the
/// rotation-group attitude error.
inline ControlResult geometric_control(const RigidBodyState& state,
                                       const Setpoint& setpoint,
                                       const GeometricGains& gains,
                                       const RobotParams& params,
                                       const ControlWrench& previous = {}) {
    Vec3 e_p = state.position - setpoint.position;
    Vec3 e_v = state.linear_velocity - setpoint.velocity;

    Vec3 f_des = params.mass *
                 (-gains.k_position.cwiseProduct(e_p) -
                  gains.k_velocity.cwiseProduct(e_v) +
                  Vec3(0.0, 0.0, params.gravity));

    ControlResult out;
    if (f_des.norm() < 1e-9) {
        out.wrench = previous;
        out.degenerate = true;
        return out;
    }

    out.wrench.collective_thrust = f_des.dot(state.rotation.col(2));
    if (out.wrench.collective_thrust < 0.0) {
        out.wrench.collective_thrust = 0.0;
        out.thrust_clamped = true;
    }

    Vec3 b3 = f_des.normalized();
    Vec3 heading(std::cos(setpoint.yaw), std::sin(setpoint.yaw), 0.0);
    Vec3 b2 = b3.cross(heading);
    if (b2.norm() < 1e-9) {
        // desired thrust parallel to the heading; attitude target undefined
        out.wrench = previous;
        out.degenerate = true;
        return out;
    }
    b2.normalize();
    Mat3 rot_des;
    rot_des.col(0) = b2.cross(b3);
    rot_des.col(1) = b2;
    rot_des.col(2) = b3;

    Vec3 e_rot = 0.5 * vee(rot_des.transpose() * state.rotation -
                           state.rotation.transpose() * rot_des);
    Vec3 e_rate = state.angular_velocity; // omega_des = 0

    out.wrench.moment = -gains.k_rotation.cwiseProduct(e_rot) -
                        gains.k_angular_rate.cwiseProduct(e_rate);
    return out;
}

namespace detail {

// ZYX Euler angles (roll, pitch, yaw) of a body-to-inertial rotation.
inline Vec3 euler_zyx(const Mat3& r) {
    double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    double roll = std::atan2(r(2, 1), r(2, 2));
    double yaw = std::atan2(r(1, 0), r(0, 0));
    return Vec3(roll, pitch, yaw);
}

inline double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

} // namespace detail

/// Cascaded PID: position PID -> desired acceleration -> implicit
/// roll/pitch target (small-angle) -> attitude P -> rate PID -> moments.
/// Integrators are clamped componentwise after every update.
inline ControlResult pid_cascade_control(const RigidBodyState& state,
                                         const Setpoint& setpoint,
                                         const PidGains& gains,
                                         ControllerState& ctrl,
                                         double dt,
                                         const RobotParams& params) {
    // outer loop: position -> desired acceleration
    Vec3 e_p = setpoint.position - state.position;
    ctrl.position_integrator += e_p * dt;
    ctrl.position_integrator =
        ctrl.position_integrator.cwiseMax(-gains.integrator_limit)
                                .cwiseMin(gains.integrator_limit);
    Vec3 e_dot = ctrl.has_previous ? Vec3((e_p - ctrl.previous_error) / dt)
                                   : Vec3(Vec3::Zero());
    Vec3 accel_des = gains.position_kp.cwiseProduct(e_p) +
                     gains.position_ki.cwiseProduct(ctrl.position_integrator) +
                     gains.position_kd.cwiseProduct(e_dot);

    ControlResult out;
    out.wrench.collective_thrust = params.mass * (params.gravity + accel_des.z());
    if (out.wrench.collective_thrust < 0.0) {
        out.wrench.collective_thrust = 0.0;
        out.thrust_clamped = true;
    }

    // implicit attitude: small-angle mapping of lateral acceleration about
    // the yaw setpoint
    double cy = std::cos(setpoint.yaw);
    double sy = std::sin(setpoint.yaw);
    double pitch_des = (accel_des.x() * cy + accel_des.y() * sy) / params.gravity;
    double roll_des = (accel_des.x() * sy - accel_des.y() * cy) / params.gravity;

    // middle loop: attitude P -> desired body rates
    Vec3 att = detail::euler_zyx(state.rotation);
    Vec3 e_att(detail::wrap_angle(roll_des - att.x()),
               detail::wrap_angle(pitch_des - att.y()),
               detail::wrap_angle(setpoint.yaw - att.z()));
    Vec3 rate_des = gains.attitude_kp.cwiseProduct(e_att);

    // inner loop: rate PID -> moments
    Vec3 e_rate = rate_des - state.angular_velocity;
    ctrl.rate_integrator += e_rate * dt;
    ctrl.rate_integrator =
        ctrl.rate_integrator.cwiseMax(-gains.integrator_limit)
                            .cwiseMin(gains.integrator_limit);
    Vec3 e_rate_dot = ctrl.has_previous
                          ? Vec3((e_rate - ctrl.previous_rate_error) / dt)
                          : Vec3(Vec3::Zero());
    out.wrench.moment = gains.rate_kp.cwiseProduct(e_rate) +
                        gains.rate_ki.cwiseProduct(ctrl.rate_integrator) +
                        gains.rate_kd.cwiseProduct(e_rate_dot);

    ctrl.previous_error = e_p;
    ctrl.previous_rate_error = e_rate;
    ctrl.has_previous = true;
    return out;
}

} // namespace kicksim
