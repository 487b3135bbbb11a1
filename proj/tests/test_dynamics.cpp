#include "doctest.h"

#include "pinnmpc/dynamics.hpp"
#include "pinnmpc/gait.hpp"
#include "pinnmpc/rng.hpp"

using namespace pinnmpc;

namespace {

RobotParams test_params() {
    RobotParams p;
    p.m = 50.0;
    p.inertia = Vec3(2.5, 9.0, 10.0).asDiagonal();
    p.leg_masses = {1.0, 1.0, 1.0, 1.0};
    return p;
}

Footholds symmetric_feet(const RobotState& x) {
    return gait_contact_at(0.0, GaitSchedule::standing(), x).footholds;
}

RobotState standing_state() {
    RobotState s;
    s.r = Vec3(0, 0, 0.38);
    return s;
}

RobotState random_state(Rng& rng) {
    RobotState s;
    for (int i = 0; i < 3; ++i) {
        s.r[i] = rng.uniform(-1, 1);
        s.theta[i] = rng.uniform(-0.5, 0.5);
        s.r_dot[i] = rng.uniform(-1, 1);
        s.theta_dot[i] = rng.uniform(-1, 1);
    }
    s.r.z() += 1.0;
    return s;
}

ControlInput random_input(Rng& rng) {
    ControlInput u;
    for (auto& f : u.forces) f = Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(0, 500));
    return u;
}

}  // namespace

TEST_CASE("equilibrium forces produce zero acceleration") {
    RobotParams params = test_params();
    PayloadTruth payload{50.0, Vec3::Zero()};
    RobotState x = standing_state();
    ControlInput u = equilibrium_forces(params, payload.m_p);
    Vec12 dx = continuous_dynamics(x, u, params, payload, symmetric_feet(x));
    CHECK(dx.segment<3>(6).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dx.segment<3>(9).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero forces, zero legs, zero payload: free fall of the torso") {
    RobotParams params = test_params();
    params.leg_masses = {0, 0, 0, 0};
    RobotState x = standing_state();
    ControlInput u;
    Vec12 dx = continuous_dynamics(x, u, params, PayloadTruth{}, symmetric_feet(x));
    CHECK(dx.segment<3>(6).isApprox(Vec3(0, 0, -params.g), 1e-14));
    CHECK(dx.segment<3>(9).norm() == 0.0);
}

TEST_CASE("payload torque term matches the hand cross product") {
    // m_p = 50 kg at r_p = (0.1,0,0): torque = r_p x (0,0,-m_p g) = (0, 49.05, 0)
    RobotParams params = test_params();
    PayloadTruth payload{50.0, Vec3(0.1, 0, 0)};
    RobotState x = standing_state();
    ControlInput u;  // no contact forces; legs still weigh
    params.leg_masses = {0, 0, 0, 0};
    Vec12 dx = continuous_dynamics(x, u, params, payload, symmetric_feet(x));
    CHECK(dx[9] == doctest::Approx(0.0));
    CHECK(dx[10] == doctest::Approx(49.05 / 9.0));  // divided by I_yy
    CHECK(dx[11] == doctest::Approx(0.0));
}

TEST_CASE("decomposition: continuous = nominal + payload_dynamics(true omega)") {
    RobotParams params = test_params();
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        PayloadTruth payload{rng.uniform(0, 100),
                             Vec3(rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15),
                                  rng.uniform(-0.15, 0.15))};
        RobotState x = random_state(rng);
        ControlInput u = random_input(rng);
        Footholds feet = symmetric_feet(x);
        Vec12 full = continuous_dynamics(x, u, params, payload, feet);
        Vec12 nominal = nominal_dynamics(x, u, params, feet);
        Vec12 payload_part = payload_dynamics(true_omega(payload, params), params);
        CHECK((full - nominal - payload_part).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("zero payload: nominal equals continuous") {
    RobotParams params = test_params();
    Rng rng(11);
    RobotState x = random_state(rng);
    ControlInput u = random_input(rng);
    Footholds feet = symmetric_feet(x);
    CHECK(continuous_dynamics(x, u, params, PayloadTruth{}, feet) ==
          nominal_dynamics(x, u, params, feet));
}

TEST_CASE("payload_dynamics basics") {
    RobotParams params = test_params();
    CHECK(payload_dynamics(PayloadEstimate{}, params).norm() == 0.0);

    Vec12 dx = payload_dynamics(PayloadEstimate{50.0, Vec3::Zero()}, params);
    CHECK(dx[8] == doctest::Approx(-50.0 * params.g / params.m));
    for (int i = 0; i < 12; ++i)
        if (i != 8) CHECK(dx[i] == 0.0);
}

TEST_CASE("angular block: with zero forces and massless legs, theta_dd = p exactly") {
    RobotParams params = test_params();
    params.leg_masses = {0, 0, 0, 0};
    PayloadTruth payload{80.0, Vec3(0.12, -0.05, 0.08)};
    RobotState x = standing_state();
    ControlInput u;
    Vec12 dx = continuous_dynamics(x, u, params, payload, symmetric_feet(x));
    Vec3 p = payload.torque_param(params);
    CHECK((dx.segment<3>(9) - p).norm() < 1e-14);
}

TEST_CASE("rk4 is exact on the double integrator") {
    RobotParams params = test_params();
    params.leg_masses = {0, 0, 0, 0};
    params.m = 1.0;
    // unit vertical acceleration: F_z = m*(g + 1)
    ControlInput u;
    u.forces[0] = Vec3(0, 0, params.g + 1.0);
    RobotState x;
    x.r = Vec3(0, 0, 0);
    auto rhs = [&](const RobotState& s, const ControlInput& uu) {
        Footholds feet{Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 0)};
        // feet directly under the CoM: no torque from the single vertical force
        return continuous_dynamics(s, uu, params, PayloadTruth{}, feet);
    };
    RobotState next = rk4_step(0.01, x, u, rhs);
    CHECK(next.r.z() == doctest::Approx(5e-5).epsilon(1e-12));
    CHECK(next.r_dot.z() == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("rk4 with zero dynamics leaves the state unchanged") {
    RobotState x;
    x.r = Vec3(1, 2, 3);
    ControlInput u;
    RobotState next = rk4_step(0.5, x, u, [](const RobotState&, const ControlInput&) {
        return Vec12::Zero();
    });
    CHECK(next.to_vector() == x.to_vector());
}

TEST_CASE("rk4 keeps the equilibrium stance fixed to machine precision") {
    RobotParams params = test_params();
    PayloadTruth payload{25.0, Vec3::Zero()};
    RobotState x = standing_state();
    ControlInput u = equilibrium_forces(params, payload.m_p);
    Footholds feet = symmetric_feet(x);
    RobotState next = rk4_step(0.01, x, u, [&](const RobotState& s, const ControlInput& uu) {
        return continuous_dynamics(s, uu, params, payload, feet);
    });
    CHECK((next.to_vector() - x.to_vector()).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("rk4 halving the step shrinks single-step error by at least 2^3") {
    // smooth nonlinear field (pendulum-style couplings) so the truncation
    // error is measurable; the SRB stance step itself is near-polynomial
    RobotState x;
    x.r = Vec3(0.4, -0.2, 0.7);
    x.theta = Vec3(0.3, 0.1, -0.2);
    x.r_dot = Vec3(1.0, -0.5, 0.3);
    x.theta_dot = Vec3(-0.4, 0.8, 0.2);
    ControlInput u;
    auto rhs = [](const RobotState& s, const ControlInput&) {
        Vec12 dx;
        dx.segment<3>(0) = s.r_dot;
        dx.segment<3>(3) = s.theta_dot;
        for (int i = 0; i < 3; ++i) {
            dx[6 + i] = -std::sin(s.r[i]) - 0.2 * s.r_dot[i] + 0.3 * std::cos(s.theta[i]);
            dx[9 + i] = -2.0 * std::sin(s.theta[i]) - 0.1 * s.theta_dot[i] +
                        0.2 * std::sin(s.r[(i + 1) % 3]);
        }
        return dx;
    };
    auto advance = [&](double T, int substeps) {
        RobotState s = x;
        for (int i = 0; i < substeps; ++i) s = rk4_step(T / substeps, s, u, rhs);
        return s.to_vector();
    };
    const double T = 0.4;
    Vec12 fine = advance(T, 1024);
    const double err_full = (advance(T, 1) - fine).norm();
    const double err_half = (advance(T, 2) - fine).norm();
    CHECK(err_full > 1e-9);  // measurable truncation error
    CHECK(err_half * 8.0 <= err_full * 1.0001);
}

TEST_CASE("rk4 rejects non-finite stages naming the stage") {
    RobotState x;
    ControlInput u;
    auto bad = [](const RobotState&, const ControlInput&) {
        return Vec12::Constant(std::numeric_limits<double>::quiet_NaN());
    };
    CHECK_THROWS_WITH_AS(rk4_step(0.01, x, u, bad), doctest::Contains("stage k1"),
                         std::runtime_error);
}

TEST_CASE("non-finite inputs are rejected") {
    RobotParams params = test_params();
    RobotState x = standing_state();
    x.r[0] = std::numeric_limits<double>::infinity();
    ControlInput u;
    CHECK_THROWS_AS(continuous_dynamics(x, u, params, PayloadTruth{}, symmetric_feet(standing_state())),
                    std::invalid_argument);
}
