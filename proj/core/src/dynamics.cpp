#include "pinnmpc/dynamics.hpp"

#include <stdexcept>

namespace pinnmpc {

namespace {

Vec12 srb_rhs(const RobotState& x, const ControlInput& u, const RobotParams& params,
              double payload_mass, const Vec3& payload_torque_arm, const Footholds& footholds) {
    const Vec3 g_vec = params.gravity_vec();
    const double leg_sum = params.leg_mass_sum();

    Vec3 force = u.total_force() + (params.m + leg_sum) * g_vec + payload_mass * g_vec;
    Vec3 torque = Vec3::Zero();
    for (int i = 0; i < kNumLegs; ++i) {
        torque += (footholds[i] - x.r).cross(u.forces[i]);
        torque += params.hip_offsets[i].cross(params.leg_masses[i] * g_vec);
    }
    torque += payload_torque_arm.cross(payload_mass * g_vec);

    Vec12 dx;
    dx.segment<3>(0) = x.r_dot;
    dx.segment<3>(3) = x.theta_dot;
    dx.segment<3>(6) = force / params.m;
    dx.segment<3>(9) = params.inertia.ldlt().solve(torque);
    return dx;
}

}  // namespace

Vec12 continuous_dynamics(const RobotState& x, const ControlInput& u,
                          const RobotParams& params, const PayloadTruth& payload,
                          const Footholds& footholds) {
    if (!x.finite() || !u.to_vector().allFinite())
        throw std::invalid_argument("continuous_dynamics: non-finite state or input");
    return srb_rhs(x, u, params, payload.m_p, payload.r_p, footholds);
}

Vec12 nominal_dynamics(const RobotState& x, const ControlInput& u,
                       const RobotParams& params, const Footholds& footholds) {
    if (!x.finite() || !u.to_vector().allFinite())
        throw std::invalid_argument("nominal_dynamics: non-finite state or input");
    return srb_rhs(x, u, params, 0.0, Vec3::Zero(), footholds);
}

Vec12 payload_dynamics(const PayloadEstimate& omega, const RobotParams& params) {
    if (!omega.finite()) throw std::invalid_argument("payload_dynamics: non-finite estimate");
    Vec12 dx = Vec12::Zero();
    dx.segment<3>(6) = omega.m_p_hat * params.gravity_vec() / params.linear_divisor();
    dx.segment<3>(9) = omega.p_hat;
    return dx;
}

PayloadEstimate true_omega(const PayloadTruth& payload, const RobotParams& params) {
    return PayloadEstimate{payload.m_p, payload.torque_param(params)};
}

RobotState rk4_step(double T, const RobotState& x, const ControlInput& u, const DynamicsRhs& rhs) {
    if (!(T > 0)) throw std::invalid_argument("rk4_step: T must be > 0");
    const Vec12 x0 = x.to_vector();

    auto stage = [&](const Vec12& xs, const char* name) {
        Vec12 k = rhs(RobotState::from_vector(xs), u);
        if (!k.allFinite())
            throw std::runtime_error(std::string("rk4_step: non-finite derivative at stage ") + name);
        return k;
    };
    const Vec12 k1 = stage(x0, "k1");
    const Vec12 k2 = stage(x0 + 0.5 * T * k1, "k2");
    const Vec12 k3 = stage(x0 + 0.5 * T * k2, "k3");
    const Vec12 k4 = stage(x0 + T * k3, "k4");

    return RobotState::from_vector(x0 + (T / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

ControlInput equilibrium_forces(const RobotParams& params, double payload_mass) {
    ControlInput u;
    const double total = (params.m + params.leg_mass_sum() + payload_mass) * params.g;
    for (int i = 0; i < kNumLegs; ++i) u.forces[i] = Vec3(0, 0, total / kNumLegs);
    return u;
}

Vec12 IdentifiedDynamics::value(const Vec12& x, const Vec12& u, const Eigen::Vector4d& omega) const {
    RobotState s = RobotState::from_vector(x);
    ControlInput in;
    for (int i = 0; i < kNumLegs; ++i) in.forces[i] = u.segment<3>(3 * i);
    Footholds feet;
    for (int i = 0; i < kNumLegs; ++i) {
        feet[i] = s.r + params.hip_offsets[i];
        feet[i].z() = 0.0;
    }
    Vec12 dx = srb_rhs(s, in, params, 0.0, Vec3::Zero(), feet);
    return dx + payload_dynamics(PayloadEstimate::from_vector(omega), params);
}

Mat12 IdentifiedDynamics::jacobian_x(const Vec12& x, const Vec12& u, const Eigen::Vector4d&) const {
    Mat12 J = Mat12::Zero();
    J.block<6, 6>(0, 6).setIdentity();  // d[r_dot; theta_dot]/d[x2]

    // theta_dd rows: feet follow the torso in x,y (arm fixed), but the moment
    // arm's z component is -r_z, so only d/dr_z survives:
    //   d(sum (c_i - r) x F_i)/dr_z = -z_hat x sum F_i
    RobotState s = RobotState::from_vector(x);
    (void)s;
    Vec3 f_total = Vec3::Zero();
    for (int i = 0; i < kNumLegs; ++i) f_total += u.segment<3>(3 * i);
    Vec3 dtau = -Vec3::UnitZ().cross(f_total);
    J.block<3, 1>(9, 2) = params.inertia.ldlt().solve(dtau);
    return J;
}

}  // namespace pinnmpc
