#include "pinnmpc/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "pinnmpc/dynamics.hpp"

namespace pinnmpc {

void Scenario::validate() const {
    if (!(timestep > 0)) throw std::invalid_argument("Scenario: timestep must be > 0");
    if (duration < timestep) throw std::invalid_argument("Scenario: duration must be >= timestep");
    gait.validate();
}

RobotState Scenario::on_reference(const ReferenceGenerator& gen) {
    ReferencePoint ref = reference_at(0.0, gen);
    RobotState s;
    s.r = ref.pos;
    s.theta = ref.ori;
    s.r_dot = ref.vel;
    s.theta_dot = ref.ang_vel;
    return s;
}

TrajectoryLog run_scenario(const Scenario& scenario, const RobotParams& params,
                           Controller& controller, const StepHook& hook) {
    scenario.validate();
    params.validate();
    controller.reset();

    TrajectoryLog log;
    const double T = scenario.timestep;
    const auto n_steps = static_cast<std::size_t>(std::llround(scenario.duration / T));
    log.steps.reserve(n_steps);

    RobotState state = scenario.initial_state;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * T;

        ControlContext ctx;
        ctx.t = t;
        ctx.state = state;
        ctx.reference = reference_at(t, scenario.reference);
        ctx.contact = gait_contact_at(t, scenario.gait, state);
        ctx.dt = T;

        ControlInput u = controller.compute(ctx);
        u.contact = ctx.contact.contact;
        u.enforce_mask();

        LogStep step;
        step.t = t;
        step.state = state.to_vector();
        step.reference = ctx.reference.to_state();
        step.input = u.to_vector();
        step.error.segment<3>(0) = state.r - ctx.reference.pos;
        step.error.segment<3>(3) = state.theta - ctx.reference.ori;
        step.stats = controller.last_stats();
        step.contact = ctx.contact.contact;
        step.footholds = ctx.contact.footholds;

        RobotState next = rk4_step(T, state, u, [&](const RobotState& x, const ControlInput& uu) {
            return continuous_dynamics(x, uu, params, scenario.payload, ctx.contact.footholds);
        });

        log.steps.push_back(step);
        if (hook) hook(step, next);

        state = next;
        log.end_time = t + T;
        if (state.to_vector().norm() > scenario.divergence_bound || !state.finite()) {
            log.diverged = true;
            break;
        }
    }
    return log;
}

}  // namespace pinnmpc
