#include "doctest.h"

#include <cmath>

#include "pinnmpc/gait.hpp"

using namespace pinnmpc;

TEST_CASE("trot schedule: diagonal pairs alternate") {
    GaitSchedule g;  // duty 0.5, offsets (0, 0.5, 0.5, 0)
    RobotState torso;
    // phase 0.25: legs with offset 0 (1 and 4, zero-based 0 and 3) in stance
    ContactInfo info = gait_contact_at(0.25 * g.period, g, torso);
    CHECK(info.contact[0]);
    CHECK_FALSE(info.contact[1]);
    CHECK_FALSE(info.contact[2]);
    CHECK(info.contact[3]);
    // half a period later the other pair carries
    info = gait_contact_at(0.75 * g.period, g, torso);
    CHECK_FALSE(info.contact[0]);
    CHECK(info.contact[1]);
    CHECK(info.contact[2]);
    CHECK_FALSE(info.contact[3]);
}

TEST_CASE("all-stance schedule keeps every leg down") {
    GaitSchedule g = GaitSchedule::standing();
    RobotState torso;
    for (double t : {0.0, 0.123, 0.5, 1.9}) {
        ContactInfo info = gait_contact_at(t, g, torso);
        for (bool c : info.contact) CHECK(c);
    }
}

TEST_CASE("foothold world x is monotone while tracking a forward ramp") {
    GaitSchedule g;
    const double v = 0.2, dt = 0.01;
    std::array<double, kNumLegs> last_x = {-1e9, -1e9, -1e9, -1e9};
    double max_x = -1e9;
    for (int k = 0; k < 300; ++k) {
        const double t = k * dt;
        RobotState torso;
        torso.r = Vec3(v * t, 0, 0.38);
        torso.r_dot = Vec3(v, 0, 0);
        ContactInfo info = gait_contact_at(t, g, torso);
        for (int leg = 0; leg < kNumLegs; ++leg) {
            const auto li = static_cast<std::size_t>(leg);
            if (!info.contact[li]) continue;
            CHECK(info.footholds[li].x() >= last_x[li] - 1e-12);
            last_x[li] = info.footholds[li].x();
            max_x = std::max(max_x, info.footholds[li].x());
        }
    }
    CHECK(max_x > 0.4);  // the pattern stepped forward over the horizon
}

TEST_CASE("footholds stay pinned during stance under constant velocity") {
    GaitSchedule g;
    const double v = 0.2, dt = 0.01;
    // leg 0 is in stance over [0, duty*period)
    Vec3 first = Vec3::Zero();
    bool have_first = false;
    for (int k = 0; k < 20; ++k) {
        const double t = k * dt;
        RobotState torso;
        torso.r = Vec3(0.1 + v * t, 0, 0.38);  // started walking before t=0
        torso.r_dot = Vec3(v, 0, 0);
        ContactInfo info = gait_contact_at(t, g, torso);
        REQUIRE(info.contact[0]);
        if (!have_first) {
            first = info.footholds[0];
            have_first = true;
        }
        // back-extrapolation is clipped at t=0, so the hold is exact here
        CHECK((info.footholds[0] - first).norm() < 1e-12);
    }
}

TEST_CASE("stance fraction equals the duty factor within one timestep") {
    for (double duty : {0.3, 0.5, 0.8}) {
        GaitSchedule g;
        g.duty = duty;
        const double dt = 0.001;
        const int steps = static_cast<int>(g.period / dt);
        for (int leg = 0; leg < kNumLegs; ++leg) {
            int stance = 0;
            for (int k = 0; k < steps; ++k)
                if (gait_mask_at(k * dt, g)[static_cast<std::size_t>(leg)]) ++stance;
            const double fraction = static_cast<double>(stance) / steps;
            CHECK(std::abs(fraction - duty) <= dt / g.period + 1e-12);
        }
    }
}

TEST_CASE("negative time is rejected") {
    GaitSchedule g;
    RobotState torso;
    CHECK_THROWS_AS(gait_contact_at(-0.1, g, torso), std::invalid_argument);
}
