#pragma once

#include <functional>
#include <string>

#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Single-rigid-body dynamics with payload:
///   m r_dd     = sum F_ci - (m + sum m_i + m_p) g z_hat
///   I theta_dd = sum (c_i - r) x F_ci + sum r_i x (m_i g_vec) + r_p x (m_p g_vec)
/// Returns [r_dot; theta_dot; r_dd; theta_dd]. Footholds are world-frame;
/// swing feet contribute nothing (their forces are zero by contract).
Vec12 continuous_dynamics(const RobotState& x, const ControlInput& u,
                          const RobotParams& params, const PayloadTruth& payload,
                          const Footholds& footholds);

/// Payload-free part of the dynamics (the nominal model the NMPC and the
/// physics loss know in closed form).
Vec12 nominal_dynamics(const RobotState& x, const ControlInput& u,
                       const RobotParams& params, const Footholds& footholds);

/// Identified-payload contribution: [0_6; -m_p_hat g z_hat / m_div; p_hat].
/// continuous == nominal + payload_dynamics(true omega) exactly.
Vec12 payload_dynamics(const PayloadEstimate& omega, const RobotParams& params);

/// True omega for a configured payload (decomposition identity reference).
PayloadEstimate true_omega(const PayloadTruth& payload, const RobotParams& params);

/// Classical RK4 advance over [0, T] with u held constant.
/// Throws if any stage evaluates to a non-finite value, naming the stage.
using DynamicsRhs = std::function<Vec12(const RobotState&, const ControlInput&)>;
RobotState rk4_step(double T, const RobotState& x, const ControlInput& u, const DynamicsRhs& rhs);

/// Equal-share stance forces that hold the plant in static equilibrium
/// (payload included when supplied).
ControlInput equilibrium_forces(const RobotParams& params, double payload_mass = 0.0);

/// The identified continuous dynamics f_bar(x,u) + f_hat(omega) used by the
/// physics-informed loss, with feet taken at the nominal hip projections under
/// the torso (z = 0). Carries the analytic state Jacobian for exact
/// loss gradients.
struct IdentifiedDynamics {
    RobotParams params;

    Vec12 value(const Vec12& x, const Vec12& u, const Eigen::Vector4d& omega) const;
    /// d(value)/dx. Only the theta_dd rows depend on the state (through r_z).
    Mat12 jacobian_x(const Vec12& x, const Vec12& u, const Eigen::Vector4d& omega) const;
};

}  // namespace pinnmpc
