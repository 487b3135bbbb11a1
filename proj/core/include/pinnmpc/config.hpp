#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pinnmpc/control.hpp"
#include "pinnmpc/identifier.hpp"
#include "pinnmpc/nmpc.hpp"
#include "pinnmpc/reference.hpp"
#include "pinnmpc/train.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Structured run configuration: INI-style sections [plant], [gait],
/// [identifier], [pinn], [nmpc], [pid], [scenario]. Unknown sections or keys
/// are rejected; `seed` is mandatory. The raw text is kept so outputs can
/// echo it verbatim alongside its hash.
struct RunConfig {
    std::uint64_t seed = 0;

    RobotParams plant;
    GaitSchedule gait;

    IdentifierGains ident_gains;
    IdentifyOptions ident_opts;

    std::vector<int> pinn_hidden = {96, 96, 96};
    TrainConfig train;
    double t_jitter_lo = 0.005, t_jitter_hi = 0.05, t_jitter_prob = 0.5;

    NmpcConfig nmpc = NmpcConfig::quadruped_default();
    PidGains pid;
    ForceBounds bounds;

    // scenario / harness
    double duration = 10.0;
    double timestep = 0.01;
    double speed = 0.2;
    double height = 0.38;
    Vec3 ori_ref_raw = Vec3(-0.05, 2.95, 0.0);  // as configured
    OriRefOrder ori_ref_order = OriRefOrder::PitchYawRoll;
    double payload_mass = 50.0;
    Vec3 payload_r_p = Vec3(0.05, 0.02, 0.03);
    std::string controller = "opi-pinnpc";  // or "baseline"
    // dataset collection
    std::size_t collect_instances = 20;
    double collect_duration = 5.0;
    double mass_lo = 25.0, mass_hi = 100.0;
    double r_p_bound = 0.15;
    double stagger_span = 2.5;
    // benchmark
    std::vector<double> benchmark_payloads = {25.0, 37.5, 50.0, 62.5, 75.0, 87.5, 100.0};
    double metrics_window_start = 1.0;

    std::string raw_text;
    std::string config_hash;  // fnv1a-64 of raw_text, hex

    Vec3 ori_ref() const { return to_roll_pitch_yaw(ori_ref_raw, ori_ref_order); }
    ReferenceGenerator trot_reference() const;
    ReferenceGenerator stand_reference() const;

    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    /// Built-in defaults rendered as config text (also the documented template).
    static std::string default_text(std::uint64_t seed);

    /// Comment-header lines (hash, seed, verbatim config echo) for outputs.
    std::vector<std::string> echo_lines() const;
};

}  // namespace pinnmpc
