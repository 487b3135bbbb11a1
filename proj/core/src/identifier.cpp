#include "pinnmpc/identifier.hpp"

#include <cmath>

#include "pinnmpc/control.hpp"
#include "pinnmpc/dynamics.hpp"
#include "pinnmpc/rng.hpp"

namespace pinnmpc {

Vec3 auxiliary_control(const Vec3& x12, const Vec3& x22, const Vec3& x12_ref,
                       const IdentifierState& id, const Vec3& k) {
    const Vec3 ebar = x22 + id.gains.W * (x12 - x12_ref);
    return -k - id.estimate(x22) - id.gains.W * x22 - id.gains.V * ebar;
}

IdentifierState update_law_step(const IdentifierState& id, const Vec3& u, const Vec3& k,
                                const Vec3& x22, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("update_law_step: dt must be > 0");
    IdentifierState next = id;
    const Vec3 psi = -id.gains.K * (u + id.xi + id.gains.K * x22 + k);
    next.xi = id.xi + dt * psi;
    next.p_hat = next.estimate(x22);
    next.z = (-dt * id.gains.K.diagonal().array()).exp().matrix().asDiagonal() * id.z;
    return next;
}

double estimate_mass(const std::vector<Vec3>& total_forces, const std::vector<Vec3>& accels,
                     const RobotParams& params) {
    if (total_forces.empty() || total_forces.size() != accels.size())
        throw std::invalid_argument("estimate_mass: needs one stance window of paired samples");

    const double known_weight = (params.m + params.leg_mass_sum()) * params.g;
    const double free_fall_guard = 1e-3 * params.g;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < total_forces.size(); ++i) {
        const double denom = params.g + accels[i].z();
        if (std::abs(denom) < free_fall_guard) continue;  // free fall, no weight signal
        sum += (total_forces[i].z() - known_weight - params.m * accels[i].z()) / denom;
        ++used;
    }
    if (used == 0) throw std::runtime_error("estimate_mass: all samples discarded (free fall)");
    return std::max(0.0, sum / static_cast<double>(used));
}

IdentificationResult identify(IdentificationPlant& plant, const RobotParams& params,
                              const IdentifierGains& gains, const IdentifyOptions& opts) {
    gains.validate();
    const double dt = plant.timestep();

    Vec3 k_term = Vec3::Zero();
    for (int i = 0; i < kNumLegs; ++i)
        k_term += params.hip_offsets[static_cast<std::size_t>(i)]
                      .cross(params.leg_masses[static_cast<std::size_t>(i)] * params.gravity_vec());
    k_term = params.inertia.ldlt().solve(k_term);

    IdentifierState id;
    id.gains = gains;
    if (opts.z0) id.z = *opts.z0;

    IdentificationResult result;
    ForceBounds bounds;
    bounds.lower = opts.force_lower;
    bounds.upper = opts.force_upper;

    std::vector<Vec3> force_window, accel_window;
    double mass_hat = 0.0;
    bool mass_done = false;

    const auto n_cap = static_cast<std::size_t>(std::llround(opts.time_cap / dt));
    for (std::size_t step = 0; step < n_cap; ++step) {
        const double t = static_cast<double>(step) * dt;
        const RobotState& x = plant.state();
        const Vec3 x22 = x.theta_dot;
        const Vec3 ebar = x22 + gains.W * (x.theta - opts.ori_ref);

        result.trace.push_back({t, ebar, id.estimate(x22), id.z});

        if (mass_done && !(ebar.norm() > gains.e_threshold)) {
            result.omega = PayloadEstimate{mass_hat, id.estimate(x22)};
            result.converged = true;
            result.elapsed = t;
            result.final_ebar = ebar;
            return result;
        }

        const Vec3 u_aux = auxiliary_control(x.theta, x22, opts.ori_ref, id, k_term);

        Vec6 wrench = gravity_feedforward_wrench(params, PayloadEstimate{mass_hat, Vec3::Zero()});
        wrench.segment<3>(0) += opts.height_kp.cwiseProduct(opts.pos_ref - x.r) -
                                opts.height_kd.cwiseProduct(x.r_dot);
        wrench.segment<3>(3) = params.inertia * u_aux;

        ContactInfo contact;
        contact.contact = plant.contact_mask();
        contact.footholds = plant.footholds();
        WrenchDistribution dist = distribute_wrench(wrench, contact, x.r);
        ControlInput zero;
        zero.contact = contact.contact;
        zero.enforce_mask();
        ControlInput u = composite_control(zero, dist.delta, bounds);

        plant.apply(u);
        id = update_law_step(id, u_aux, k_term, x22, dt);

        if (!mass_done && t >= opts.mass_window_start && t < opts.mass_window_end) {
            bool all_stance = true;
            for (bool c : contact.contact) all_stance &= c;
            if (all_stance) {
                force_window.push_back(plant.measured_total_force());
                accel_window.push_back(plant.measured_accel());
            }
        }
        if (!mass_done && t + dt >= opts.mass_window_end) {
            mass_hat = estimate_mass(force_window, accel_window, params);
            mass_done = true;
        }
    }

    const RobotState& x = plant.state();
    const Vec3 ebar = x.theta_dot + gains.W * (x.theta - opts.ori_ref);
    throw IdentificationError("identify: time cap reached before ||ebar|| < threshold", ebar);
}

SimulatedStandingPlant::SimulatedStandingPlant(const RobotParams& params,
                                               const PayloadTruth& payload,
                                               const RobotState& initial, double timestep,
                                               double force_noise_std, double accel_noise_std,
                                               std::uint64_t noise_seed)
    : params_(params),
      payload_(payload),
      state_(initial),
      timestep_(timestep),
      force_noise_std_(force_noise_std),
      accel_noise_std_(accel_noise_std),
      noise_state_(noise_seed) {
    GaitSchedule standing = GaitSchedule::standing();
    ContactInfo info = gait_contact_at(0.0, standing, initial);
    footholds_ = info.footholds;
}

void SimulatedStandingPlant::apply(const ControlInput& u) {
    const Vec3 v_before = state_.r_dot;
    state_ = rk4_step(timestep_, state_, u, [&](const RobotState& x, const ControlInput& uu) {
        return continuous_dynamics(x, uu, params_, payload_, footholds_);
    });
    last_accel_ = (state_.r_dot - v_before) / timestep_;
    last_force_ = u.total_force();
    if (force_noise_std_ > 0 || accel_noise_std_ > 0) {
        Rng rng(noise_state_++);
        for (int i = 0; i < 3; ++i) last_force_[i] += force_noise_std_ * rng.normal();
        for (int i = 0; i < 3; ++i) last_accel_[i] += accel_noise_std_ * rng.normal();
    }
}

Vec3 SimulatedStandingPlant::measured_accel() const { return last_accel_; }
Vec3 SimulatedStandingPlant::measured_total_force() const { return last_force_; }

}  // namespace pinnmpc
