#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pinnmpc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

inline constexpr int kNumLegs = 4;
inline constexpr int kStateDim = 12;
inline constexpr int kInputDim = 12;

using Footholds = std::array<Vec3, kNumLegs>;
using ContactMask = std::array<bool, kNumLegs>;

/// 12-dim torso state: position, roll-pitch-yaw orientation, linear and
/// angular velocity (small-angle model, theta_dot == body rate).
struct RobotState {
    Vec3 r = Vec3::Zero();          // [m]
    Vec3 theta = Vec3::Zero();      // [rad], (roll, pitch, yaw)
    Vec3 r_dot = Vec3::Zero();      // [m/s]
    Vec3 theta_dot = Vec3::Zero();  // [rad/s]

    Vec12 to_vector() const {
        Vec12 v;
        v << r, theta, r_dot, theta_dot;
        return v;
    }
    static RobotState from_vector(const Vec12& v) {
        RobotState s;
        s.r = v.segment<3>(0);
        s.theta = v.segment<3>(3);
        s.r_dot = v.segment<3>(6);
        s.theta_dot = v.segment<3>(9);
        return s;
    }
    bool finite() const { return to_vector().allFinite(); }
    /// Full invariant: finite and every angle within (-pi, pi].
    bool valid() const {
        if (!finite()) return false;
        for (int i = 0; i < 3; ++i)
            if (theta[i] <= -M_PI || theta[i] > M_PI) return false;
        return true;
    }
};

/// Per-foot ground-reaction forces plus contact mask. Swing feet carry
/// exactly zero force.
struct ControlInput {
    std::array<Vec3, kNumLegs> forces = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    ContactMask contact = {true, true, true, true};

    Vec12 to_vector() const {
        Vec12 v;
        for (int i = 0; i < kNumLegs; ++i) v.segment<3>(3 * i) = forces[i];
        return v;
    }
    static ControlInput from_vector(const Vec12& v, const ContactMask& mask) {
        ControlInput u;
        u.contact = mask;
        for (int i = 0; i < kNumLegs; ++i) u.forces[i] = v.segment<3>(3 * i);
        u.enforce_mask();
        return u;
    }
    void enforce_mask() {
        for (int i = 0; i < kNumLegs; ++i)
            if (!contact[i]) forces[i].setZero();
    }
    bool consistent() const {
        for (int i = 0; i < kNumLegs; ++i)
            if (!contact[i] && forces[i].norm() != 0.0) return false;
        return true;
    }
    Vec3 total_force() const {
        Vec3 f = Vec3::Zero();
        for (const auto& fi : forces) f += fi;
        return f;
    }
};

/// Physical constants of the torso + legs (payload excluded).
struct RobotParams {
    double m = 50.0;                 // torso mass [kg]
    Mat3 inertia = (Vec3(2.5, 9.0, 10.0)).asDiagonal();  // [kg m^2]
    std::array<double, kNumLegs> leg_masses = {1.0, 1.0, 1.0, 1.0};
    std::array<Vec3, kNumLegs> hip_offsets = {
        Vec3(0.4, 0.25, 0.0), Vec3(0.4, -0.25, 0.0),
        Vec3(-0.4, 0.25, 0.0), Vec3(-0.4, -0.25, 0.0)};
    double g = 9.81;                 // magnitude; gravity vector is (0,0,-g)
    double payload_divisor = 0.0;    // divisor of the payload force term; 0 => use m

    double leg_mass_sum() const {
        double s = 0;
        for (double mi : leg_masses) s += mi;
        return s;
    }
    double linear_divisor() const { return payload_divisor > 0.0 ? payload_divisor : m; }
    Vec3 gravity_vec() const { return Vec3(0, 0, -g); }

    void validate() const {
        if (!(m > 0)) throw std::invalid_argument("RobotParams: m must be > 0");
        if (!(g > 0)) throw std::invalid_argument("RobotParams: g must be > 0");
        for (double mi : leg_masses)
            if (mi < 0) throw std::invalid_argument("RobotParams: leg mass must be >= 0");
        Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
        if (es.eigenvalues().minCoeff() <= 0 || (inertia - inertia.transpose()).norm() > 1e-12)
            throw std::invalid_argument("RobotParams: inertia must be symmetric positive definite");
    }
};

/// Ground-truth payload configuration (what the identifier must recover).
struct PayloadTruth {
    double m_p = 0.0;        // [kg]
    Vec3 r_p = Vec3::Zero(); // offset from CoM [m]

    /// The torque-offset parameter p = I^{-1} (r_p x m_p g_vec) identified online.
    Vec3 torque_param(const RobotParams& params) const {
        return params.inertia.ldlt().solve(r_p.cross(m_p * params.gravity_vec()));
    }
};

/// Identified payload parameters omega_hat = [m_p_hat, p_hat^T]^T.
struct PayloadEstimate {
    double m_p_hat = 0.0;
    Vec3 p_hat = Vec3::Zero();  // [rad/s^2]

    Eigen::Vector4d to_vector() const {
        Eigen::Vector4d v;
        v << m_p_hat, p_hat;
        return v;
    }
    static PayloadEstimate from_vector(const Eigen::Vector4d& v) {
        return PayloadEstimate{v[0], v.segment<3>(1)};
    }
    bool finite() const { return to_vector().allFinite(); }
};

/// Periodic contact schedule. duty = 1 is the all-stance (standing) case.
struct GaitSchedule {
    double period = 0.5;  // [s]
    double duty = 0.5;    // stance fraction, (0, 1]
    std::array<double, kNumLegs> phase_offset = {0.0, 0.5, 0.5, 0.0};
    std::array<Vec3, kNumLegs> nominal_foothold = {
        Vec3(0.4, 0.25, 0.0), Vec3(0.4, -0.25, 0.0),
        Vec3(-0.4, 0.25, 0.0), Vec3(-0.4, -0.25, 0.0)};

    void validate() const {
        if (!(period > 0)) throw std::invalid_argument("GaitSchedule: period must be > 0");
        if (!(duty > 0) || duty > 1) throw std::invalid_argument("GaitSchedule: duty must be in (0,1]");
        for (double off : phase_offset)
            if (off < 0 || off >= 1) throw std::invalid_argument("GaitSchedule: phase offsets must be in [0,1)");
    }
    static GaitSchedule standing() {
        GaitSchedule g;
        g.duty = 1.0;
        g.phase_offset = {0, 0, 0, 0};
        return g;
    }
};

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

}  // namespace pinnmpc
