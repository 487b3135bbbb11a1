#include "pinnmpc/reference.hpp"

#include <stdexcept>

namespace pinnmpc {

ReferencePoint reference_at(double t, const ReferenceGenerator& gen) {
    if (t < 0) throw std::invalid_argument("reference_at: t must be >= 0");
    ReferencePoint p;
    p.ori = gen.ori;
    switch (gen.kind) {
        case ReferenceGenerator::Kind::Trot:
            p.pos = Vec3(gen.x0 + gen.speed * t, 0.0, gen.height);
            p.vel = Vec3(gen.speed, 0.0, 0.0);
            break;
        case ReferenceGenerator::Kind::Stand:
            p.pos = Vec3(gen.x0, 0.0, gen.height);
            break;
    }
    return p;
}

OriRefOrder ori_ref_order_from_string(const std::string& s) {
    if (s == "pitch_yaw_roll") return OriRefOrder::PitchYawRoll;
    if (s == "yaw_pitch_roll") return OriRefOrder::YawPitchRoll;
    if (s == "roll_pitch_yaw") return OriRefOrder::RollPitchYaw;
    throw std::invalid_argument("unknown ori_ref_order: " + s);
}

Vec3 to_roll_pitch_yaw(const Vec3& v, OriRefOrder order) {
    switch (order) {
        case OriRefOrder::PitchYawRoll: return Vec3(v[2], v[0], v[1]);
        case OriRefOrder::YawPitchRoll: return Vec3(v[2], v[1], v[0]);
        case OriRefOrder::RollPitchYaw: return v;
    }
    throw std::logic_error("unreachable");
}

}  // namespace pinnmpc
