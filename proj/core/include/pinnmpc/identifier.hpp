#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "pinnmpc/types.hpp"

namespace pinnmpc {

struct IdentifierGains {
    Mat3 W = 0.6 * Mat3::Identity();
    Mat3 V = 0.8 * Mat3::Identity();
    Mat3 K = 1.7 * Mat3::Identity();
    double e_threshold = 1e-4;

    void validate() const {
        auto diag_pd = [](const Mat3& m) {
            return m.isDiagonal(0.0) && (m.diagonal().array() > 0).all();
        };
        if (!diag_pd(W) || !diag_pd(V) || !diag_pd(K))
            throw std::invalid_argument("IdentifierGains: W, V, K must be positive diagonal");
        if (!(e_threshold > 0)) throw std::invalid_argument("IdentifierGains: e_threshold must be > 0");
    }
};

/// State of the torque-offset identifier. The update law integrates xi;
/// the reported estimate is assembled with the rate-output injection,
/// p_hat = xi + K x22, which is what makes p_hat -> p decoupled from the
/// control loop. z is a pure diagnostic integrating dz/dt = -K z.
struct IdentifierState {
    Vec3 p_hat = Vec3::Zero();
    Vec3 xi = Vec3::Zero();
    Vec3 z = Vec3::Zero();
    IdentifierGains gains;

    Vec3 estimate(const Vec3& x22) const { return xi + gains.K * x22; }
};

/// Auxiliary control law  u = -k - p_hat - W x22 - V ebar,
/// with ebar = x22 + W (x12 - x12_ref). x12_ref is constant during the
/// identification phase.
Vec3 auxiliary_control(const Vec3& x12, const Vec3& x22, const Vec3& x12_ref,
                       const IdentifierState& id, const Vec3& k);

/// One explicit-Euler step of the adaptive update law
///   psi = -K (u + xi + K x22 + k),  xi <- xi + dt psi,
/// followed by the estimate assembly and the diagnostic decay
/// z <- exp(-K dt) z (exact for the diagonal K).
IdentifierState update_law_step(const IdentifierState& id, const Vec3& u, const Vec3& k,
                                const Vec3& x22, double dt);

/// Payload-mass estimate from an all-stance window:
///   m_hat = mean[ (sum F_z - (m + sum m_i) g - m a_z) / (g + a_z) ], clamped at 0.
/// Samples with |g + a_z| below a free-fall guard are discarded.
double estimate_mass(const std::vector<Vec3>& total_forces, const std::vector<Vec3>& accels,
                     const RobotParams& params);

/// Plant access used by the identification session.
class IdentificationPlant {
public:
    virtual ~IdentificationPlant() = default;
    virtual double timestep() const = 0;
    virtual const RobotState& state() const = 0;
    virtual std::array<bool, kNumLegs> contact_mask() const = 0;
    virtual Footholds footholds() const = 0;
    virtual void apply(const ControlInput& u) = 0;
    /// Linear acceleration over the last applied step (finite-difference sensor).
    virtual Vec3 measured_accel() const = 0;
    /// Total stance force actually applied over the last step.
    virtual Vec3 measured_total_force() const = 0;
};

struct IdentifyOptions {
    Vec3 ori_ref = Vec3::Zero();
    Vec3 pos_ref = Vec3(0, 0, 0.38);
    double mass_window_start = 1.5;  // [s]
    double mass_window_end = 2.5;    // [s]
    double time_cap = 30.0;          // simulated-time iteration cap [s]
    Vec3 height_kp = Vec3(8000, 8000, 20000);
    Vec3 height_kd = Vec3(1265, 1265, 2000);
    Vec3 force_lower = Vec3(-3000, -3000, -3000);
    Vec3 force_upper = Vec3(3000, 3000, 5000);
    std::optional<Vec3> z0;  // diagnostic initial value (tests seed it from the truth)
};

struct IdentTraceRow {
    double t;
    Vec3 ebar;
    Vec3 p_hat;
    Vec3 z;
};

struct IdentificationResult {
    PayloadEstimate omega;
    bool converged = false;
    double elapsed = 0.0;  // simulated seconds
    Vec3 final_ebar = Vec3::Zero();
    std::vector<IdentTraceRow> trace;
};

class IdentificationError : public std::runtime_error {
public:
    IdentificationError(const std::string& msg, const Vec3& ebar)
        : std::runtime_error(msg), final_ebar(ebar) {}
    Vec3 final_ebar;
};

/// Full identification session on a standing plant: mass-estimation window
/// first, then the auxiliary-control / update-law loop until ||ebar|| drops
/// below gains.e_threshold. Throws IdentificationError at the time cap.
IdentificationResult identify(IdentificationPlant& plant, const RobotParams& params,
                              const IdentifierGains& gains, const IdentifyOptions& opts = {});

/// Ground-truth SRB plant standing on all four feet (the identification scenario).
class SimulatedStandingPlant : public IdentificationPlant {
public:
    SimulatedStandingPlant(const RobotParams& params, const PayloadTruth& payload,
                           const RobotState& initial, double timestep,
                           double force_noise_std = 0.0, double accel_noise_std = 0.0,
                           std::uint64_t noise_seed = 0);

    double timestep() const override { return timestep_; }
    const RobotState& state() const override { return state_; }
    std::array<bool, kNumLegs> contact_mask() const override { return {true, true, true, true}; }
    Footholds footholds() const override { return footholds_; }
    void apply(const ControlInput& u) override;
    Vec3 measured_accel() const override;
    Vec3 measured_total_force() const override;

private:
    RobotParams params_;
    PayloadTruth payload_;
    RobotState state_;
    Footholds footholds_;
    double timestep_;
    Vec3 last_accel_ = Vec3::Zero();
    Vec3 last_force_ = Vec3::Zero();
    double force_noise_std_;
    double accel_noise_std_;
    std::uint64_t noise_state_;
};

}  // namespace pinnmpc
