#pragma once

#include <string>

#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Reference sample expanded to the full 12-dim state.
struct ReferencePoint {
    Vec3 pos = Vec3::Zero();
    Vec3 ori = Vec3::Zero();  // (roll, pitch, yaw)
    Vec3 vel = Vec3::Zero();
    Vec3 ang_vel = Vec3::Zero();

    Vec12 to_state() const {
        Vec12 v;
        v << pos, ori, vel, ang_vel;
        return v;
    }
};

/// Trajectory generators: "trot" walks forward at constant speed and height,
/// "stand" holds pose (the identification phase, constant orientation).
struct ReferenceGenerator {
    enum class Kind { Trot, Stand };
    Kind kind = Kind::Trot;
    double speed = 0.2;      // [m/s] along x (trot)
    double height = 0.38;    // [m]
    double x0 = 0.0;         // start offset along x
    Vec3 ori = Vec3::Zero(); // constant orientation reference (roll, pitch, yaw)

    static ReferenceGenerator trot() { return ReferenceGenerator{}; }
    static ReferenceGenerator stand() {
        ReferenceGenerator g;
        g.kind = Kind::Stand;
        g.speed = 0.0;
        return g;
    }
};

ReferencePoint reference_at(double t, const ReferenceGenerator& gen);

/// Orientation-reference component ordering as printed in configs.
enum class OriRefOrder { PitchYawRoll, YawPitchRoll, RollPitchYaw };

OriRefOrder ori_ref_order_from_string(const std::string& s);

/// Map a configured orientation triple to internal (roll, pitch, yaw).
Vec3 to_roll_pitch_yaw(const Vec3& as_configured, OriRefOrder order);

}  // namespace pinnmpc
