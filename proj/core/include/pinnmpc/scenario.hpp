#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pinnmpc/gait.hpp"
#include "pinnmpc/reference.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Per-step solver diagnostics appended to trajectory logs (zeros for
/// controllers without an inner optimizer).
struct SolverStats {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    bool inexact = false;
    bool extrapolated = false;
};

struct ControlContext {
    double t = 0.0;
    RobotState state;
    ReferencePoint reference;
    ContactInfo contact;
    double dt = 0.0;
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual ControlInput compute(const ControlContext& ctx) = 0;
    virtual SolverStats last_stats() const { return {}; }
    /// Called once before a rollout so stateful controllers start fresh.
    virtual void reset() {}
};

struct Scenario {
    PayloadTruth payload;
    double duration = 10.0;   // [s]
    double timestep = 0.01;   // control period T [s]
    ReferenceGenerator reference;
    GaitSchedule gait;
    std::uint64_t seed = 0;
    RobotState initial_state;
    double divergence_bound = 1e3;  // rollout aborts when ||state|| exceeds this
    double force_noise_std = 0.0;   // measurement noise (identification inputs)
    double accel_noise_std = 0.0;

    void validate() const;
    /// Initial state on the reference at t = 0.
    static RobotState on_reference(const ReferenceGenerator& gen);
};

struct LogStep {
    double t = 0.0;
    Vec12 state = Vec12::Zero();
    Vec12 reference = Vec12::Zero();
    Vec12 input = Vec12::Zero();
    Vec6 error = Vec6::Zero();  // position error (3), orientation error (3)
    SolverStats stats;
    ContactMask contact = {true, true, true, true};
    Footholds footholds = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

struct TrajectoryLog {
    std::vector<LogStep> steps;
    bool diverged = false;
    double end_time = 0.0;
};

/// Hook invoked after each plant step with the pre-step sample and the
/// footholds it was integrated with (dataset collection taps in here).
using StepHook = std::function<void(const LogStep&, const RobotState& next)>;

/// Fixed-step ground-truth rollout: gait -> reference -> controller ->
/// RK4 plant advance. Divergence truncates the log and sets the flag.
TrajectoryLog run_scenario(const Scenario& scenario, const RobotParams& params,
                           Controller& controller, const StepHook& hook = nullptr);

}  // namespace pinnmpc
