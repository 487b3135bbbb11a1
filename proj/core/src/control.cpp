#include "pinnmpc/control.hpp"

#include <Eigen/QR>
#include <stdexcept>

namespace pinnmpc {

Vec6 pid_feedback(const RobotState& state, const ReferencePoint& reference,
                  const PidGains& gains, PidState& pid, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("pid_feedback: dt must be > 0");
    Vec6 error, error_rate;
    error << reference.pos - state.r, reference.ori - state.theta;
    error_rate << reference.vel - state.r_dot, reference.ang_vel - state.theta_dot;

    pid.integral += error * dt;
    pid.integral = pid.integral.cwiseMax(-gains.integral_bound).cwiseMin(gains.integral_bound);
    pid.prev_error = error;

    return gains.kp.cwiseProduct(error) + gains.ki.cwiseProduct(pid.integral) +
           gains.kd.cwiseProduct(error_rate);
}

WrenchDistribution distribute_wrench(const Vec6& wrench, const ContactInfo& contact,
                                     const Vec3& torso_position) {
    int n_stance = 0;
    for (bool c : contact.contact) n_stance += c ? 1 : 0;
    if (n_stance < 2) throw std::invalid_argument("distribute_wrench: needs >= 2 stance feet");

    Eigen::MatrixXd grasp(6, 3 * n_stance);
    int col = 0;
    std::array<int, kNumLegs> stance_index = {-1, -1, -1, -1};
    for (int i = 0; i < kNumLegs; ++i) {
        const auto li = static_cast<std::size_t>(i);
        if (!contact.contact[li]) continue;
        grasp.block<3, 3>(0, 3 * col).setIdentity();
        grasp.block<3, 3>(3, 3 * col) = skew(contact.footholds[li] - torso_position);
        stance_index[li] = col++;
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(grasp);
    WrenchDistribution out;
    out.rank_deficient = cod.rank() < 6;
    Eigen::VectorXd f = cod.solve(wrench);  // minimum-norm / least-squares

    out.delta.contact = contact.contact;
    for (int i = 0; i < kNumLegs; ++i) {
        const auto li = static_cast<std::size_t>(i);
        out.delta.forces[li] =
            stance_index[li] >= 0 ? Vec3(f.segment<3>(3 * stance_index[li])) : Vec3::Zero();
    }
    return out;
}

ControlInput composite_control(const ControlInput& u_opt, const ControlInput& pid_delta,
                               const ForceBounds& bounds) {
    bounds.validate();
    ControlInput u = u_opt;
    for (int i = 0; i < kNumLegs; ++i) {
        const auto li = static_cast<std::size_t>(i);
        u.forces[li] = (u_opt.forces[li] + pid_delta.forces[li])
                           .cwiseMax(bounds.lower)
                           .cwiseMin(bounds.upper);
    }
    u.enforce_mask();
    return u;
}

Vec6 gravity_feedforward_wrench(const RobotParams& params, const PayloadEstimate& omega) {
    const Vec3 g_vec = params.gravity_vec();
    Vec6 w;
    w.segment<3>(0) =
        -(params.m + params.leg_mass_sum() + omega.m_p_hat) * g_vec;  // support total weight
    Vec3 leg_torque = Vec3::Zero();
    for (int i = 0; i < kNumLegs; ++i)
        leg_torque += params.hip_offsets[static_cast<std::size_t>(i)]
                          .cross(params.leg_masses[static_cast<std::size_t>(i)] * g_vec);
    w.segment<3>(3) = -leg_torque - params.inertia * omega.p_hat;
    return w;
}

ControlInput BaselineController::compute(const ControlContext& ctx) {
    Vec6 wrench = gravity_feedforward_wrench(params_, omega_);
    wrench += pid_feedback(ctx.state, ctx.reference, gains_, pid_, ctx.dt);

    WrenchDistribution dist = distribute_wrench(wrench, ctx.contact, ctx.state.r);
    ControlInput zero;
    zero.contact = ctx.contact.contact;
    zero.enforce_mask();
    return composite_control(zero, dist.delta, bounds_);
}

}  // namespace pinnmpc
