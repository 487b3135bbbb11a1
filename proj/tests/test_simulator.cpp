#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pinnmpc/config.hpp"
#include "pinnmpc/control.hpp"
#include "pinnmpc/dataset.hpp"
#include "pinnmpc/dynamics.hpp"
#include "pinnmpc/runners.hpp"
#include "pinnmpc/scenario.hpp"

using namespace pinnmpc;

namespace {

RobotParams test_params() {
    RobotParams p;
    p.m = 50.0;
    p.inertia = Vec3(2.5, 9.0, 10.0).asDiagonal();
    return p;
}

class EquilibriumController : public Controller {
public:
    EquilibriumController(const RobotParams& params, double payload_mass)
        : u_(equilibrium_forces(params, payload_mass)) {}
    ControlInput compute(const ControlContext& ctx) override {
        ControlInput u = u_;
        u.contact = ctx.contact.contact;
        return u;
    }

private:
    ControlInput u_;
};

Scenario standing_scenario(double payload_mass, double duration) {
    Scenario s;
    s.payload = PayloadTruth{payload_mass, Vec3::Zero()};
    s.duration = duration;
    s.reference = ReferenceGenerator::stand();
    s.gait = GaitSchedule::standing();
    s.initial_state = Scenario::on_reference(s.reference);
    return s;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CollectConfig small_collect(std::size_t instances, double duration) {
    CollectConfig cc;
    cc.grid = make_payload_grid(instances, 25.0, 100.0, 0.15, 99);
    cc.duration = duration;
    cc.seed = 7;
    cc.reference = ReferenceGenerator::trot();
    return cc;
}

}  // namespace

TEST_CASE("zero-payload stance under equilibrium forces holds position for 10 s") {
    RobotParams params = test_params();
    Scenario s = standing_scenario(0.0, 10.0);
    EquilibriumController ctrl(params, 0.0);
    TrajectoryLog log = run_scenario(s, params, ctrl);
    CHECK_FALSE(log.diverged);
    for (const auto& step : log.steps) CHECK(step.error.segment<3>(0).norm() < 1e-6);
}

TEST_CASE("payload-ignorant controller sags under a 50 kg payload") {
    RobotParams params = test_params();
    Scenario s = standing_scenario(50.0, 2.0);
    EquilibriumController ctrl(params, 0.0);  // balances only the known weight
    TrajectoryLog log = run_scenario(s, params, ctrl);
    const double z_err_final = log.steps.back().error[2];
    CHECK(z_err_final < 0.0);  // sag direction
}

TEST_CASE("identical seeds give bit-identical trajectory logs") {
    RunConfig config = RunConfig::from_text(RunConfig::default_text(3));
    RobotParams params = test_params();
    Scenario s = standing_scenario(20.0, 1.0);
    EquilibriumController ctrl(params, 20.0);
    TrajectoryLog a = run_scenario(s, params, ctrl);
    TrajectoryLog b = run_scenario(s, params, ctrl);
    const std::string dir = std::filesystem::temp_directory_path().string();
    write_trajectory_csv(dir + "/log_a.csv", a, config);
    write_trajectory_csv(dir + "/log_b.csv", b, config);
    CHECK(file_bytes(dir + "/log_a.csv") == file_bytes(dir + "/log_b.csv"));
}

TEST_CASE("divergent rollout is truncated and flagged") {
    RobotParams params = test_params();
    Scenario s = standing_scenario(0.0, 5.0);
    s.divergence_bound = 10.0;
    class BadController : public Controller {
        ControlInput compute(const ControlContext& ctx) override {
            ControlInput u;
            u.contact = ctx.contact.contact;
            for (auto& f : u.forces) f = Vec3(0, 0, 1e5);
            return u;
        }
    } ctrl;
    TrajectoryLog log = run_scenario(s, params, ctrl);
    CHECK(log.diverged);
    CHECK(log.steps.size() < 500);
}

TEST_CASE("reference generators match the configured trajectories") {
    ReferenceGenerator trot = ReferenceGenerator::trot();
    trot.ori = Vec3(0, -0.05, 2.95);
    ReferencePoint p = reference_at(2.0, trot);
    CHECK(p.pos.isApprox(Vec3(0.4, 0, 0.38)));
    CHECK(reference_at(0.0, trot).pos.isApprox(Vec3(0, 0, 0.38)));
    CHECK(p.vel.isApprox(Vec3(0.2, 0, 0)));

    ReferenceGenerator stand = ReferenceGenerator::stand();
    stand.ori = Vec3(0.1, 0.2, 0.3);
    for (double t : {0.0, 1.0, 7.5}) {
        ReferencePoint q = reference_at(t, stand);
        CHECK(q.pos.isApprox(Vec3(0, 0, 0.38)));
        CHECK(q.ori.isApprox(Vec3(0.1, 0.2, 0.3)));
        CHECK(q.vel.norm() == 0.0);
    }
    CHECK_THROWS_AS(reference_at(-1.0, trot), std::invalid_argument);
}

TEST_CASE("desk-scale dataset counts: 20 instances x 5 s at 100 Hz = 10000 samples") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(20, 5.0);
    CollectReport report = collect_dataset(cc, params);
    CHECK(report.skipped_instances.empty());
    CHECK(report.samples.size() == 10000);
    CHECK(report.max_consistency_error < 1e-12);
}

TEST_CASE("paper-scale dataset counts: 100 instances x 10 s at 100 Hz = 100000 samples") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(100, 10.0);
    CollectReport report = collect_dataset(cc, params);
    CHECK(report.skipped_instances.empty());
    CHECK(report.samples.size() == 100000);
}

TEST_CASE("zero-payload grid records near-zero omega in every sample") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(1, 1.0);
    cc.grid = {PayloadTruth{0.0, Vec3::Zero()}};
    CollectReport report = collect_dataset(cc, params);
    REQUIRE_FALSE(report.samples.empty());
    for (const auto& s : report.samples) {
        CHECK(s.omega_hat.m_p_hat < 1e-6);
        CHECK(s.omega_hat.p_hat.norm() < 1e-6);
    }
}

TEST_CASE("collection is deterministic under the seed") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(2, 1.0);
    CollectReport a = collect_dataset(cc, params);
    CollectReport b = collect_dataset(cc, params);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].features() == b.samples[i].features());
        CHECK(a.samples[i].x_next == b.samples[i].x_next);
    }
}

TEST_CASE("payload grid spans the mass range with bounded gaps") {
    auto grid = make_payload_grid(20, 25.0, 100.0, 0.15, 5);
    REQUIRE(grid.size() == 20);
    CHECK(grid.front().m_p == 25.0);
    CHECK(grid.back().m_p == 100.0);
    const double max_gap = (100.0 - 25.0) / 19.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i].m_p - grid[i - 1].m_p <= max_gap + 1e-12);
    for (const auto& p : grid) CHECK(p.r_p.norm() <= 0.15);
}

TEST_CASE("dataset CSV survives a write/read round trip") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(1, 0.5);
    CollectReport report = collect_dataset(cc, params);
    const std::string path = std::filesystem::temp_directory_path().string() + "/ds_rt.csv";
    write_dataset_csv(path, report.samples, "test");
    auto back = read_dataset_csv(path);
    REQUIRE(back.size() == report.samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].features() == report.samples[i].features());
        CHECK(back[i].x_next == report.samples[i].x_next);
    }
}

TEST_CASE("T jitter covers the configured range and keeps consistency") {
    RobotParams params = test_params();
    CollectConfig cc = small_collect(1, 2.0);
    cc.t_jitter_prob = 1.0;
    CollectReport report = collect_dataset(cc, params);
    double t_lo = 1e9, t_hi = 0;
    for (const auto& s : report.samples) {
        t_lo = std::min(t_lo, s.T);
        t_hi = std::max(t_hi, s.T);
    }
    CHECK(t_lo >= cc.t_jitter_lo);
    CHECK(t_hi <= cc.t_jitter_hi);
    CHECK(t_hi - t_lo > 0.02);  // actually spread out
    CHECK(report.max_consistency_error < 1e-12);
}
