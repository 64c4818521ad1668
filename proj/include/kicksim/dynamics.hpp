#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "kicksim/errors.hpp"

namespace kicksim {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

// Tolerances used by the state/integrator contracts.
inline constexpr double kRotationTol = 1e-9;
inline constexpr double kMaxStepDt = 0.01;

/// Physical constants of the vehicle. Inertia is a full 3x3 matrix,
/// expected symmetric positive definite.
struct RobotParams {
    double mass = 0.0;       // kg
    double arm_length = 0.0; // m
    Mat3 inertia = Mat3::Zero();
    double thrust_coeff = 0.0; // N/(rad/s)^2
    double moment_coeff = 0.0; // N*m/(rad/s)^2
    double gravity = 9.81;     // m/s^2

    double moment_ratio() const { return moment_coeff / thrust_coeff; }

    bool valid() const {
        if (!(mass > 0.0 && arm_length > 0.0 && thrust_coeff > 0.0 &&
              moment_coeff > 0.0 && gravity > 0.0))
            return false;
        if ((inertia - inertia.transpose()).norm() > 1e-12 * (1.0 + inertia.norm()))
            return false;
        Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
        if (es.eigenvalues().minCoeff() <= 0.0)
            return false;
        double gamma = moment_ratio();
        return std::isfinite(gamma) && gamma > 0.0;
    }

    // Crazyflie 2.0 stock values. Mass and arm length from the vendor
    // datasheet; thrust/moment coefficients from community system
    // identification of the stock motors/props.
    static RobotParams crazyflie() {
        RobotParams p;
        p.mass = 0.027;
        p.arm_length = 0.046;
        p.inertia = Vec3(1.395e-5, 1.436e-5, 2.173e-5).asDiagonal();
        p.thrust_coeff = 2.25e-8;
        p.moment_coeff = 1.3e-10;
        p.gravity = 9.81;
        return p;
    }
};

/// Full 6-DoF rigid body state. Rotation maps body to inertial frame;
/// angular velocity is expressed in the body frame.
struct RigidBodyState {
    Vec3 position = Vec3::Zero();
    Mat3 rotation = Mat3::Identity();
    Vec3 linear_velocity = Vec3::Zero();
    Vec3 angular_velocity = Vec3::Zero();

    bool rotation_valid(double tol = kRotationTol) const {
        if ((rotation.transpose() * rotation - Mat3::Identity()).norm() > tol)
            return false;
        return std::abs(rotation.determinant() - 1.0) <= tol;
    }

    bool finite() const {
        return position.allFinite() && rotation.allFinite() &&
               linear_velocity.allFinite() && angular_velocity.allFinite();
    }
};

/// Individual rotor thrust magnitudes F_i = k_f * omega_i^2, all >= 0.
struct RotorForces {
    Vec4 forces = Vec4::Zero();

    bool valid() const { return forces.allFinite() && forces.minCoeff() >= 0.0; }
};

/// Collective thrust plus body-frame moments, the control input seen by
/// the rigid body.
struct ControlWrench {
    double collective_thrust = 0.0; // N
    Vec3 moment = Vec3::Zero();     // N*m

    Vec4 as_vector() const {
        return Vec4(collective_thrust, moment.x(), moment.y(), moment.z());
    }
};

inline Mat3 hat(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

inline Vec3 vee(const Mat3& m) {
    return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// Rodrigues formula with Taylor fallbacks near zero angle.
inline Mat3 exp_so3(const Vec3& phi) {
    double theta2 = phi.squaredNorm();
    Mat3 k = hat(phi);
    double a, b;
    if (theta2 < 1e-16) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        double theta = std::sqrt(theta2);
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    return Mat3::Identity() + a * k + b * k * k;
}

/// Nearest rotation matrix in the Frobenius sense (polar projection).
inline Mat3 project_rotation(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 d = Vec3(1.0, 1.0, -1.0).asDiagonal();
        r = svd.matrixU() * d * svd.matrixV().transpose();
    }
    return r;
}

/// u = B * F with the plus-configuration mixing matrix: rotors 1..4 sit
/// on the +x, +y, -x, -y body arms.
inline ControlWrench wrench_from_rotors(const RotorForces& rotors,
                                        const RobotParams& params) {
    const Vec4& f = rotors.forces;
    double l = params.arm_length;
    double gamma = params.moment_ratio();
    ControlWrench u;
    u.collective_thrust = f.sum();
    u.moment = Vec3(l * (f[1] - f[3]),
                    l * (f[2] - f[0]),
                    gamma * (f[0] - f[1] + f[2] - f[3]));
    return u;
}

enum class AllocationMode { strict, saturate };

struct AllocationResult {
    RotorForces rotors;
    ControlWrench achieved; // wrench recomputed from the (possibly clamped) forces
    bool saturated = false;
};

/// F = B^-1 * u, solved in closed form. `strict` errors on any negative
/// rotor force; `saturate` clamps to zero and reports the wrench actually
/// produced.
inline AllocationResult rotors_from_wrench(const ControlWrench& wrench,
                                           const RobotParams& params,
                                           AllocationMode mode = AllocationMode::saturate) {
    double l = params.arm_length;
    double gamma = params.moment_ratio();
    if (l == 0.0 || gamma == 0.0 || !std::isfinite(gamma))
        throw SingularMixing("mixing matrix is singular (arm length or moment ratio is zero)");

    double t4 = wrench.collective_thrust / 4.0;
    double mx = wrench.moment.x() / (2.0 * l);
    double my = wrench.moment.y() / (2.0 * l);
    double mz = wrench.moment.z() / (4.0 * gamma);

    AllocationResult out;
    out.rotors.forces = Vec4(t4 - my + mz,
                             t4 + mx - mz,
                             t4 + my + mz,
                             t4 - mx - mz);
    if (out.rotors.forces.minCoeff() < 0.0) {
        if (mode == AllocationMode::strict)
            throw NegativeRotorForce("wrench requires a negative rotor force");
        out.rotors.forces = out.rotors.forces.cwiseMax(0.0);
        out.saturated = true;
    }
    out.achieved = wrench_from_rotors(out.rotors, params);
    return out;
}

/// Inertial-frame acceleration: gravity down, collective thrust along the
/// body z axis rotated into the inertial frame.
inline Vec3 translational_derivative(const RigidBodyState& state,
                                     double collective_thrust,
                                     const RobotParams& params) {
    Vec3 thrust_s = state.rotation * Vec3(0.0, 0.0, collective_thrust);
    return Vec3(0.0, 0.0, -params.gravity) + thrust_s / params.mass;
}

/// Body-frame angular acceleration from the Euler equations.
inline Vec3 rotational_derivative(const RigidBodyState& state,
                                  const Vec3& moment,
                                  const RobotParams& params) {
    const Vec3& w = state.angular_velocity;
    return params.inertia.ldlt().solve(moment - w.cross(params.inertia * w));
}

namespace detail {

// RK4 stage state: position, velocity, rotation increment (rotation
// vector relative to the step's initial attitude) and body rates.
struct StageState {
    Vec3 p, v, phi, w;
};

// Truncated rotation-vector kinematics (Bortz equation) for
// R = R0 * exp(phi^) with body rates w; omitted terms are O(|phi|^4),
// which keeps the integrator 4th order on the rotation group.
inline Vec3 dexpinv(const Vec3& phi, const Vec3& w) {
    return w + 0.5 * phi.cross(w) + (1.0 / 12.0) * phi.cross(phi.cross(w));
}

inline StageState derivative(const StageState& y, const Mat3& rotation0,
                             double thrust, const Vec3& moment,
                             const RobotParams& params) {
    RigidBodyState s;
    s.rotation = rotation0 * exp_so3(y.phi);
    s.angular_velocity = y.w;
    StageState d;
    d.p = y.v;
    d.v = translational_derivative(s, thrust, params);
    d.phi = dexpinv(y.phi, y.w);
    d.w = rotational_derivative(s, moment, params);
    return d;
}

} // namespace detail

/// One fixed step of classical RK4 over the coupled translational and
/// rotational ODEs. The attitude is integrated on the rotation group via
/// a local rotation-vector chart and re-orthonormalized afterwards.
inline RigidBodyState step(const RigidBodyState& state, const RotorForces& rotors,
                           const RobotParams& params, double dt) {
    if (!(dt > 0.0) || dt > kMaxStepDt)
        throw Error("step: dt must be in (0, 0.01] s");

    ControlWrench u = wrench_from_rotors(rotors, params);

    using detail::StageState;
    auto f = [&](const StageState& y) {
        return detail::derivative(y, state.rotation, u.collective_thrust,
                                  u.moment, params);
    };
    auto axpy = [](const StageState& y, double a, const StageState& d) {
        return StageState{y.p + a * d.p, y.v + a * d.v,
                          y.phi + a * d.phi, y.w + a * d.w};
    };

    StageState y0{state.position, state.linear_velocity, Vec3::Zero(),
                  state.angular_velocity};
    StageState k1 = f(y0);
    StageState k2 = f(axpy(y0, dt / 2.0, k1));
    StageState k3 = f(axpy(y0, dt / 2.0, k2));
    StageState k4 = f(axpy(y0, dt, k3));

    StageState y1 = y0;
    y1.p += dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    y1.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    y1.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    y1.w += dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);

    RigidBodyState next;
    next.position = y1.p;
    next.linear_velocity = y1.v;
    next.angular_velocity = y1.w;
    next.rotation = y1.phi.isZero(0.0)
                        ? state.rotation
                        : project_rotation(state.rotation * exp_so3(y1.phi));
    if (!next.finite())
        throw NonFiniteState("step: state diverged to NaN/Inf");
    return next;
}

} // namespace kicksim
