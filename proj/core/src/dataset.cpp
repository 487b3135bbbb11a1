#include "pinnmpc/dataset.hpp"

#include <cmath>

#include "pinnmpc/csv.hpp"
#include "pinnmpc/dynamics.hpp"
#include "pinnmpc/rng.hpp"

namespace pinnmpc {

std::vector<PayloadTruth> make_payload_grid(std::size_t instances, double m_lo, double m_hi,
                                            double r_bound, std::uint64_t seed) {
    if (instances == 0) throw std::invalid_argument("make_payload_grid: grid must be non-empty");
    std::vector<PayloadTruth> grid;
    grid.reserve(instances);
    Rng rng(seed);
    for (std::size_t i = 0; i < instances; ++i) {
        PayloadTruth p;
        p.m_p = instances == 1
                    ? m_lo
                    : m_lo + (m_hi - m_lo) * static_cast<double>(i) / static_cast<double>(instances - 1);
        // rejection-sample the offset ball
        do {
            p.r_p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * r_bound;
        } while (p.r_p.norm() > r_bound);
        grid.push_back(p);
    }
    return grid;
}

CollectReport collect_dataset(const CollectConfig& config, const RobotParams& params) {
    if (config.grid.empty()) throw std::invalid_argument("collect_dataset: grid must be non-empty");
    CollectReport report;

    for (std::size_t i = 0; i < config.grid.size(); ++i) {
        Rng rng = Rng::derive(config.seed, i);
        const PayloadTruth& payload = config.grid[i];

        ReferenceGenerator ref = config.reference;
        if (config.grid.size() > 1 && config.stagger_span > 0)
            ref.x0 = config.stagger_span * static_cast<double>(i) /
                     static_cast<double>(config.grid.size() - 1);

        // identification phase: standing at the trot start pose
        ReferenceGenerator stand = ReferenceGenerator::stand();
        stand.height = ref.height;
        stand.x0 = ref.x0;
        stand.ori = ref.ori;
        IdentifyOptions opts = config.ident_opts;
        opts.ori_ref = ref.ori;
        opts.pos_ref = Vec3(ref.x0, 0.0, ref.height);

        SimulatedStandingPlant plant(params, payload, Scenario::on_reference(stand),
                                     config.timestep);
        PayloadEstimate omega;
        try {
            omega = identify(plant, params, config.ident_gains, opts).omega;
        } catch (const IdentificationError&) {
            report.skipped_instances.push_back(i);
            continue;
        }
        report.omegas.push_back(omega);

        Scenario scenario;
        scenario.payload = payload;
        scenario.duration = config.duration;
        scenario.timestep = config.timestep;
        scenario.reference = ref;
        scenario.gait = config.gait;
        scenario.seed = config.seed;
        scenario.initial_state = Scenario::on_reference(ref);

        BaselineController controller(params, omega, config.pid, config.bounds);

        auto hook = [&](const LogStep& step, const RobotState& next) {
            TrainingSample s;
            s.x_k = step.state;
            s.u_k = step.input;
            s.omega_hat = omega;
            const bool jitter = rng.uniform() < config.t_jitter_prob;
            ControlInput u = ControlInput::from_vector(step.input, step.contact);
            if (jitter) {
                s.T = rng.uniform(config.t_jitter_lo, config.t_jitter_hi);
                s.x_next = rk4_step(s.T, RobotState::from_vector(step.state), u,
                                    [&](const RobotState& x, const ControlInput& uu) {
                                        return continuous_dynamics(x, uu, params, payload,
                                                                   step.footholds);
                                    })
                               .to_vector();
            } else {
                s.T = config.timestep;
                s.x_next = next.to_vector();
            }
            // consistency: re-integration with the true payload must reproduce the label
            Vec12 again = rk4_step(s.T, RobotState::from_vector(s.x_k), u,
                                   [&](const RobotState& x, const ControlInput& uu) {
                                       return continuous_dynamics(x, uu, params, payload,
                                                                  step.footholds);
                                   })
                              .to_vector();
            report.max_consistency_error =
                std::max(report.max_consistency_error, (again - s.x_next).norm());
            report.samples.push_back(std::move(s));
        };

        run_scenario(scenario, params, controller, hook);
    }

    Rng shuffle_rng = Rng::derive(config.seed, 0x5417FFEULL);
    shuffle(report.samples, shuffle_rng);
    return report;
}

void write_dataset_csv(const std::string& path, const std::vector<TrainingSample>& samples,
                       const std::string& header_comment) {
    CsvWriter w(path);
    if (!header_comment.empty()) w.comment(header_comment);
    std::vector<std::string> cols;
    for (int i = 0; i < 12; ++i) cols.push_back("x" + std::to_string(i));
    for (int i = 0; i < 12; ++i) cols.push_back("u" + std::to_string(i));
    cols.push_back("T");
    cols.push_back("m_p_hat");
    for (int i = 0; i < 3; ++i) cols.push_back("p_hat" + std::to_string(i));
    for (int i = 0; i < 12; ++i) cols.push_back("y" + std::to_string(i));
    w.header(cols);
    std::vector<double> row(41);
    for (const auto& s : samples) {
        Eigen::Matrix<double, 29, 1> f = s.features();
        for (int i = 0; i < 29; ++i) row[static_cast<std::size_t>(i)] = f[i];
        for (int i = 0; i < 12; ++i) row[static_cast<std::size_t>(29 + i)] = s.x_next[i];
        w.row(row);
    }
}

std::vector<TrainingSample> read_dataset_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.columns.size() != 41)
        throw std::runtime_error("read_dataset_csv: expected 41 columns in " + path);
    std::vector<TrainingSample> samples;
    samples.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        TrainingSample s;
        for (int i = 0; i < 12; ++i) s.x_k[i] = r[static_cast<std::size_t>(i)];
        for (int i = 0; i < 12; ++i) s.u_k[i] = r[static_cast<std::size_t>(12 + i)];
        s.T = r[24];
        s.omega_hat.m_p_hat = r[25];
        for (int i = 0; i < 3; ++i) s.omega_hat.p_hat[i] = r[static_cast<std::size_t>(26 + i)];
        for (int i = 0; i < 12; ++i) s.x_next[i] = r[static_cast<std::size_t>(29 + i)];
        samples.push_back(s);
    }
    return samples;
}

}  // namespace pinnmpc
