#include "doctest.h"

#include <cmath>

#include "pinnmpc/identifier.hpp"
#include "pinnmpc/rng.hpp"
#include "pinnmpc/scenario.hpp"

using namespace pinnmpc;

namespace {

RobotParams test_params() {
    RobotParams p;
    p.m = 50.0;
    p.inertia = Vec3(2.5, 9.0, 10.0).asDiagonal();
    p.leg_masses = {1.0, 1.0, 1.0, 1.0};
    return p;
}

IdentifierGains paper_gains() { return IdentifierGains{}; }  // W=0.6, V=0.8, K=1.7

/// Identification subsystem of the orientation channel: x12_dot = x22,
/// x22_dot = u + k + p, integrated exactly under zero-order-hold control.
struct Subsystem {
    Vec3 x12 = Vec3::Zero(), x22 = Vec3::Zero();
    Vec3 p;
    void step(const Vec3& u, const Vec3& k, double dt) {
        const Vec3 acc = u + k + p;
        x12 += x22 * dt + 0.5 * acc * dt * dt;
        x22 += acc * dt;
    }
};

}  // namespace

TEST_CASE("mass estimator is exact on noiseless static stance") {
    RobotParams params = test_params();
    std::vector<Vec3> forces(5, Vec3(0, 0, (50.0 + 4.0 + 50.0) * params.g));
    std::vector<Vec3> accels(5, Vec3::Zero());
    CHECK(estimate_mass(forces, accels, params) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("mass estimator returns zero when force balances the known weight") {
    RobotParams params = test_params();
    std::vector<Vec3> forces(3, Vec3(0, 0, (50.0 + 4.0) * params.g));
    std::vector<Vec3> accels(3, Vec3::Zero());
    CHECK(estimate_mass(forces, accels, params) == doctest::Approx(0.0));
}

TEST_CASE("mass estimator under gaussian force noise stays within 1 kg") {
    RobotParams params = test_params();
    Rng rng(42);
    std::vector<Vec3> forces, accels;
    const double truth = (50.0 + 4.0 + 50.0) * params.g;
    for (int i = 0; i < 100; ++i) {
        forces.emplace_back(0, 0, truth + 5.0 * rng.normal());
        accels.emplace_back(Vec3::Zero());
    }
    CHECK(std::abs(estimate_mass(forces, accels, params) - 50.0) < 1.0);
}

TEST_CASE("mass estimator discards free-fall samples and rejects empty windows") {
    RobotParams params = test_params();
    std::vector<Vec3> forces = {Vec3(0, 0, 100.0)};
    std::vector<Vec3> accels = {Vec3(0, 0, -params.g)};  // free fall
    CHECK_THROWS_AS(estimate_mass(forces, accels, params), std::runtime_error);
    CHECK_THROWS_AS(estimate_mass({}, {}, params), std::invalid_argument);
}

TEST_CASE("auxiliary control cancels a known payload at rest on the reference") {
    IdentifierState id;
    id.gains = paper_gains();
    const Vec3 p(0.4, -0.7, 0.2);
    id.xi = p;  // x22 = 0, so the reported estimate equals xi
    const Vec3 u = auxiliary_control(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), id, Vec3::Zero());
    CHECK((u + p).norm() < 1e-15);  // theta_dd = u + k + p = 0
}

TEST_CASE("auxiliary control is zero on all-zero inputs") {
    IdentifierState id;
    id.gains = paper_gains();
    CHECK(auxiliary_control(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), id, Vec3::Zero()).norm() ==
          0.0);
}

TEST_CASE("auxiliary control arithmetic with the paper gains") {
    // W = 0.6 I, V = 0.8 I, e1 = (0.1,0,0), x22 = 0, k = p_hat = 0: u = -V W e1
    IdentifierState id;
    id.gains = paper_gains();
    const Vec3 x12(0.1, 0, 0);
    const Vec3 u = auxiliary_control(x12, Vec3::Zero(), Vec3::Zero(), id, Vec3::Zero());
    CHECK(u[0] == doctest::Approx(-0.048).epsilon(1e-12));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);
}

TEST_CASE("update law fixed point leaves the estimate unchanged") {
    IdentifierState id;
    id.gains = paper_gains();
    id.xi = Vec3(0.3, -0.2, 0.5);
    id.p_hat = id.xi;
    const Vec3 x22 = Vec3::Zero();
    const Vec3 k(0.1, 0.0, -0.1);
    const Vec3 u = -id.xi - k;  // u + xi + K x22 + k = 0
    IdentifierState next = update_law_step(id, u, k, x22, 0.01);
    CHECK((next.xi - id.xi).norm() == 0.0);
    CHECK((next.p_hat - id.p_hat).norm() == 0.0);
}

TEST_CASE("diagnostic z follows the closed-form exponential decay") {
    IdentifierState id;
    id.gains = paper_gains();
    id.z = Vec3(1, 1, 1);
    const double dt = 0.01;
    for (int k = 1; k <= 300; ++k) {
        id = update_law_step(id, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), dt);
        const double t = k * dt;
        CHECK(id.z.norm() == doctest::Approx(std::exp(-1.7 * t) * std::sqrt(3.0)).epsilon(1e-12));
    }
}

TEST_CASE("z norm is non-increasing for any dt up to 1/max(K)") {
    IdentifierState id;
    id.gains = paper_gains();
    id.z = Vec3(0.5, -2, 1);
    for (double dt : {1e-4, 0.01, 0.1, 1.0 / 1.7}) {
        IdentifierState next = update_law_step(id, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), dt);
        CHECK(next.z.norm() <= id.z.norm());
    }
}

TEST_CASE("closed loop on the identification subsystem converges within 5 s") {
    Subsystem plant;
    plant.p = Vec3(0, 0.5, 0);
    IdentifierState id;
    id.gains = paper_gains();
    const Vec3 k = Vec3::Zero();
    const double dt = 0.01;
    double err_at_5s = 1e9;
    for (int step = 0; step < 500; ++step) {
        const Vec3 u = auxiliary_control(plant.x12, plant.x22, Vec3::Zero(), id, k);
        const Vec3 x22_before = plant.x22;
        plant.step(u, k, dt);
        id = update_law_step(id, u, k, x22_before, dt);
        err_at_5s = (id.estimate(plant.x22) - plant.p).norm();
    }
    CHECK(err_at_5s < 1e-3);
}

TEST_CASE("closed-loop convergence holds for random constant p in [-2,2]^3") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Subsystem plant;
        plant.p = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        IdentifierState id;
        id.gains = paper_gains();
        const double dt = 0.01;
        bool converged = false;
        for (int step = 0; step < 3000 && !converged; ++step) {
            const Vec3 ebar = plant.x22 + id.gains.W * plant.x12;
            if ((id.estimate(plant.x22) - plant.p).norm() < 1e-3 &&
                ebar.norm() < id.gains.e_threshold)
                converged = true;
            const Vec3 u = auxiliary_control(plant.x12, plant.x22, Vec3::Zero(), id, Vec3::Zero());
            const Vec3 x22_before = plant.x22;
            plant.step(u, Vec3::Zero(), dt);
            id = update_law_step(id, u, Vec3::Zero(), x22_before, dt);
        }
        CHECK(converged);
    }
}

TEST_CASE("full identification on the standing plant recovers mass and torque offset") {
    RobotParams params = test_params();
    PayloadTruth payload{50.0, Vec3(0.1, 0.0, 0.05)};
    RobotState initial;
    initial.r = Vec3(0, 0, 0.38);

    SimulatedStandingPlant plant(params, payload, initial, 0.01);
    IdentifyOptions opts;
    opts.z0 = -payload.torque_param(params);
    IdentificationResult result = identify(plant, params, paper_gains(), opts);

    CHECK(result.converged);
    CHECK(std::abs(result.omega.m_p_hat - payload.m_p) < 0.5);
    const Vec3 p_true = payload.torque_param(params);
    CHECK((result.omega.p_hat - p_true).norm() / p_true.norm() < 0.02);
    CHECK(result.elapsed < 30.0);
    // the diagnostic decays monotonically along the whole run
    for (std::size_t i = 1; i < result.trace.size(); ++i)
        CHECK(result.trace[i].z.norm() <= result.trace[i - 1].z.norm() + 1e-15);
}

TEST_CASE("zero payload identifies as (approximately) zero, quickly") {
    RobotParams params = test_params();
    RobotState initial;
    initial.r = Vec3(0, 0, 0.38);
    SimulatedStandingPlant plant(params, PayloadTruth{}, initial, 0.01);
    IdentificationResult result = identify(plant, params, paper_gains(), {});
    CHECK(result.converged);
    CHECK(result.omega.m_p_hat == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(result.omega.p_hat.norm() < 1e-6);
    // nothing to excite: exits right after the mass window
    CHECK(result.elapsed <= 2.6);
}

TEST_CASE("infinite threshold returns right after the mass phase") {
    RobotParams params = test_params();
    PayloadTruth payload{30.0, Vec3(0.05, 0.05, 0.0)};
    RobotState initial;
    initial.r = Vec3(0, 0, 0.38);
    SimulatedStandingPlant plant(params, payload, initial, 0.01);
    IdentifierGains gains = paper_gains();
    gains.e_threshold = std::numeric_limits<double>::infinity();
    IdentifyOptions opts;
    IdentificationResult result = identify(plant, params, gains, opts);
    CHECK(result.converged);
    CHECK(result.elapsed == doctest::Approx(opts.mass_window_end).epsilon(0.02));
    CHECK(std::abs(result.omega.m_p_hat - payload.m_p) < 0.5);
}

TEST_CASE("iteration cap raises a non-convergence error carrying the final ebar") {
    RobotParams params = test_params();
    PayloadTruth payload{80.0, Vec3(0.12, -0.03, 0.02)};
    RobotState initial;
    initial.r = Vec3(0, 0, 0.38);
    SimulatedStandingPlant plant(params, payload, initial, 0.01);
    IdentifierGains gains = paper_gains();
    gains.e_threshold = 1e-30;  // unreachable
    IdentifyOptions opts;
    opts.time_cap = 4.0;
    try {
        identify(plant, params, gains, opts);
        FAIL("expected IdentificationError");
    } catch (const IdentificationError& e) {
        CHECK(e.final_ebar.allFinite());
        CHECK(e.final_ebar.norm() > 0.0);
    }
}
