#pragma once

#include "pinnmpc/types.hpp"

namespace pinnmpc {

struct ContactInfo {
    ContactMask contact;
    Footholds footholds;
};

/// Leg phase in [0,1) at time t.
double gait_phase(double t, const GaitSchedule& schedule, int leg);

/// Stance mask and world-frame footholds at time t. A leg is in stance while
/// its phase is below the duty factor. Footholds sit at the nominal offsets
/// under the torso x-y position at stance start; that position is
/// reconstructed from the current state by constant-velocity back-
/// extrapolation, keeping the query stateless (exact for constant-velocity
/// tracking, which covers the trot reference).
ContactInfo gait_contact_at(double t, const GaitSchedule& schedule, const RobotState& torso);

/// Contact mask only (used for horizon lookahead; no foothold placement).
ContactMask gait_mask_at(double t, const GaitSchedule& schedule);

}  // namespace pinnmpc
