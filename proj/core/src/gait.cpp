#include "pinnmpc/gait.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnmpc {

double gait_phase(double t, const GaitSchedule& schedule, int leg) {
    double phase = t / schedule.period + schedule.phase_offset[static_cast<std::size_t>(leg)];
    phase -= std::floor(phase);
    return phase;
}

ContactMask gait_mask_at(double t, const GaitSchedule& schedule) {
    ContactMask mask;
    for (int i = 0; i < kNumLegs; ++i) {
        // duty == 1 is the all-stance case; phase < duty would exclude phase 0 wrap.
        mask[static_cast<std::size_t>(i)] =
            schedule.duty >= 1.0 || gait_phase(t, schedule, i) < schedule.duty;
    }
    return mask;
}

ContactInfo gait_contact_at(double t, const GaitSchedule& schedule, const RobotState& torso) {
    if (t < 0) throw std::invalid_argument("gait_contact_at: t must be >= 0");
    schedule.validate();

    ContactInfo info;
    info.contact = gait_mask_at(t, schedule);
    for (int i = 0; i < kNumLegs; ++i) {
        const auto li = static_cast<std::size_t>(i);
        double since_touchdown = 0.0;
        if (info.contact[li] && schedule.duty < 1.0) {
            since_touchdown = gait_phase(t, schedule, i) * schedule.period;
            since_touchdown = std::min(since_touchdown, t);  // first cycle may start mid-stance
        }
        Vec3 anchor = torso.r - torso.r_dot * since_touchdown;
        info.footholds[li] = anchor + schedule.nominal_foothold[li];
        info.footholds[li].z() = 0.0;
    }
    return info;
}

}  // namespace pinnmpc
