#pragma once

#include "pinnmpc/scenario.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Per-foot force bounds, identical across feet.
struct ForceBounds {
    Vec3 lower = Vec3(-600.0, -600.0, 0.0);
    Vec3 upper = Vec3(600.0, 600.0, 2500.0);

    void validate() const {
        for (int i = 0; i < 3; ++i)
            if (!(lower[i] <= upper[i])) throw std::invalid_argument("ForceBounds: lower > upper");
    }
};

/// PID gains over the six pose axes (position xyz -> force, orientation rpy
/// -> torque), plus anti-windup clamp on the integral accumulator.
struct PidGains {
    Vec6 kp = (Vec6() << 200, 200, 200, 80, 80, 80).finished();
    Vec6 ki = Vec6::Constant(10.0);
    Vec6 kd = Vec6::Constant(20.0);
    double integral_bound = 2.0;

    void validate() const {
        if ((kp.array() < 0).any() || (ki.array() < 0).any() || (kd.array() < 0).any())
            throw std::invalid_argument("PidGains: gains must be >= 0");
    }
};

struct PidState {
    Vec6 integral = Vec6::Zero();
    Vec6 prev_error = Vec6::Zero();

    void reset() {
        integral.setZero();
        prev_error.setZero();
    }
};

/// PID wrench correction from pose error; the derivative term acts on the
/// velocity error. Returns (force, torque) stacked.
Vec6 pid_feedback(const RobotState& state, const ReferencePoint& reference,
                  const PidGains& gains, PidState& pid, double dt);

struct WrenchDistribution {
    ControlInput delta;         // forces only on stance feet
    bool rank_deficient = false;
};

/// Minimum-norm stance-force distribution realizing a total wrench:
///   sum dF_i = force,  sum (c_i - r) x dF_i = torque.
/// Exact on full-rank stance sets; least-squares (flagged) otherwise.
WrenchDistribution distribute_wrench(const Vec6& wrench, const ContactInfo& contact,
                                     const Vec3& torso_position);

/// u = clamp(u_opt + pid_delta, bounds), swing feet forced to zero.
ControlInput composite_control(const ControlInput& u_opt, const ControlInput& pid_delta,
                               const ForceBounds& bounds);

/// Comparison stand-in controller: static force balance from the identified
/// payload (weight share + torque-offset cancellation) distributed to stance
/// feet, plus the shared PID feedback. No predictive optimization.
class BaselineController : public Controller {
public:
    BaselineController(const RobotParams& params, const PayloadEstimate& omega,
                       const PidGains& gains, const ForceBounds& bounds)
        : params_(params), omega_(omega), gains_(gains), bounds_(bounds) {}

    ControlInput compute(const ControlContext& ctx) override;
    void reset() override { pid_.reset(); }

    const PayloadEstimate& omega() const { return omega_; }
    const PidGains& pid_gains() const { return gains_; }

private:
    RobotParams params_;
    PayloadEstimate omega_;
    PidGains gains_;
    ForceBounds bounds_;
    PidState pid_;
};

/// Feedforward wrench cancelling gravity, leg torques and the identified
/// payload terms (shared by the baseline and the identification session).
Vec6 gravity_feedforward_wrench(const RobotParams& params, const PayloadEstimate& omega);

}  // namespace pinnmpc
