#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinnmpc/control.hpp"
#include "pinnmpc/identifier.hpp"
#include "pinnmpc/scenario.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// One labeled pair ({x_k, u_k, T, omega_hat}, x_{k+1}); x_next is the RK4
/// advance of the true dynamics over T by construction.
struct TrainingSample {
    Vec12 x_k = Vec12::Zero();
    Vec12 u_k = Vec12::Zero();
    double T = 0.01;
    PayloadEstimate omega_hat;
    Vec12 x_next = Vec12::Zero();

    Eigen::Matrix<double, 29, 1> features() const {
        Eigen::Matrix<double, 29, 1> f;
        f << x_k, u_k, T, omega_hat.to_vector();
        return f;
    }
};

/// Payload grid with masses spanning [m_lo, m_hi] uniformly and offsets drawn
/// in the ball of radius r_bound (seeded).
std::vector<PayloadTruth> make_payload_grid(std::size_t instances, double m_lo, double m_hi,
                                            double r_bound, std::uint64_t seed);

struct CollectConfig {
    std::vector<PayloadTruth> grid;
    double duration = 5.0;   // trot seconds per instance
    double timestep = 0.01;  // 100 Hz
    std::uint64_t seed = 1;
    double t_jitter_lo = 0.005;  // sampled-T range beyond the control period
    double t_jitter_hi = 0.05;
    double t_jitter_prob = 0.5;  // fraction of samples with jittered T
    double stagger_span = 2.5;   // per-instance trot start offsets cover [0, span]
    ReferenceGenerator reference;
    GaitSchedule gait;
    IdentifierGains ident_gains;
    IdentifyOptions ident_opts;
    PidGains pid;
    ForceBounds bounds;
};

struct CollectReport {
    std::vector<TrainingSample> samples;
    std::vector<std::size_t> skipped_instances;  // identification did not converge
    std::vector<PayloadEstimate> omegas;         // per converged instance
    double max_consistency_error = 0.0;          // re-integration residual over all samples
};

/// Identification then trot rollout per payload instance, one sample per
/// control step, under the composite baseline controller with identified
/// feedforward. Samples are shuffled with a seeded RNG.
CollectReport collect_dataset(const CollectConfig& config, const RobotParams& params);

void write_dataset_csv(const std::string& path, const std::vector<TrainingSample>& samples,
                       const std::string& header_comment);
std::vector<TrainingSample> read_dataset_csv(const std::string& path);

}  // namespace pinnmpc
