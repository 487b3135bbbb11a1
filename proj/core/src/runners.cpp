#include "pinnmpc/runners.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "pinnmpc/csv.hpp"
#include "pinnmpc/losses.hpp"
#include "pinnmpc/nmpc.hpp"
#include "pinnmpc/train.hpp"

#include "json.hpp"

namespace fs = std::filesystem;

namespace pinnmpc {

namespace {

/// Removes registered files unless commit() was called (partial-output cleanup).
class OutputGuard {
public:
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    std::string add(const std::string& path) {
        paths_.push_back(path);
        return path;
    }
    void commit() { committed_ = true; }
    const std::vector<std::string>& paths() const { return paths_; }

private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

void ensure_dir(const std::string& dir) {
    if (dir.empty()) throw std::runtime_error("output directory not set");
    fs::create_directories(dir);
}

void write_header(CsvWriter& w, const RunConfig& config) {
    for (const auto& line : config.echo_lines()) w.comment(line);
}

CollectConfig make_collect_config(const RunConfig& config) {
    CollectConfig cc;
    cc.grid = make_payload_grid(config.collect_instances, config.mass_lo, config.mass_hi,
                                config.r_p_bound, config.seed ^ 0x9217DULL);
    cc.duration = config.collect_duration;
    cc.timestep = config.timestep;
    cc.seed = config.seed;
    cc.t_jitter_lo = config.t_jitter_lo;
    cc.t_jitter_hi = config.t_jitter_hi;
    cc.t_jitter_prob = config.t_jitter_prob;
    cc.stagger_span = config.stagger_span;
    cc.reference = config.trot_reference();
    cc.gait = config.gait;
    cc.ident_gains = config.ident_gains;
    cc.ident_opts = config.ident_opts;
    cc.pid = config.pid;
    cc.bounds = config.bounds;
    return cc;
}

}  // namespace

IdentificationResult identify_payload(const RunConfig& config, const PayloadTruth& payload) {
    ReferenceGenerator stand = config.stand_reference();
    SimulatedStandingPlant plant(config.plant, payload, Scenario::on_reference(stand),
                                 config.timestep);
    IdentifyOptions opts = config.ident_opts;
    opts.z0 = -payload.torque_param(config.plant);  // diagnostic seeded from the truth
    return identify(plant, config.plant, config.ident_gains, opts);
}

TrajectoryLog track_once(const RunConfig& config, const MlpModel* model,
                         const PayloadTruth& payload, const PayloadEstimate& omega,
                         const std::string& controller) {
    Scenario scenario;
    scenario.payload = payload;
    scenario.duration = config.duration;
    scenario.timestep = config.timestep;
    scenario.reference = config.trot_reference();
    scenario.gait = config.gait;
    scenario.seed = config.seed;
    scenario.initial_state = Scenario::on_reference(scenario.reference);

    if (controller == "baseline") {
        BaselineController ctrl(config.plant, omega, config.pid, config.bounds);
        return run_scenario(scenario, config.plant, ctrl);
    }
    if (controller != "opi-pinnpc")
        throw std::runtime_error("unknown controller: " + controller);
    if (!model) throw std::runtime_error("track: opi-pinnpc controller needs a checkpoint");
    NmpcConfig nmpc = config.nmpc;
    nmpc.T = config.timestep;
    PinnMpcController ctrl(*model, config.plant, omega, config.gait, scenario.reference, nmpc,
                           config.pid, config.bounds);
    return run_scenario(scenario, config.plant, ctrl);
}

void write_trajectory_csv(const std::string& path, const TrajectoryLog& log,
                          const RunConfig& config) {
    CsvWriter w(path);
    write_header(w, config);
    w.comment(std::string("diverged=") + (log.diverged ? "1" : "0"));
    std::vector<std::string> cols = {"t"};
    const char* state_names[12] = {"r_x",  "r_y",  "r_z",  "roll", "pitch", "yaw",
                                   "v_x",  "v_y",  "v_z",  "w_x",  "w_y",   "w_z"};
    for (auto* n : state_names) cols.push_back(std::string("x_") + n);
    for (auto* n : state_names) cols.push_back(std::string("ref_") + n);
    for (int leg = 0; leg < 4; ++leg)
        for (const char* ax : {"x", "y", "z"})
            cols.push_back("f" + std::to_string(leg) + "_" + ax);
    for (const char* n : {"pos_x", "pos_y", "pos_z", "ori_r", "ori_p", "ori_y"})
        cols.push_back(std::string("err_") + n);
    for (const char* n : {"solver_iters", "solver_primal", "solver_dual", "solver_objective"})
        cols.push_back(n);
    w.header(cols);

    std::vector<double> row(47);
    for (const auto& s : log.steps) {
        std::size_t c = 0;
        row[c++] = s.t;
        for (int i = 0; i < 12; ++i) row[c++] = s.state[i];
        for (int i = 0; i < 12; ++i) row[c++] = s.reference[i];
        for (int i = 0; i < 12; ++i) row[c++] = s.input[i];
        for (int i = 0; i < 6; ++i) row[c++] = s.error[i];
        row[c++] = s.stats.iterations;
        row[c++] = s.stats.primal_residual;
        row[c++] = s.stats.dual_residual;
        row[c++] = s.stats.objective;
        w.row(row);
    }
}

TrajectoryLog read_trajectory_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.columns.size() != 47)
        throw std::runtime_error("read_trajectory_csv: expected 47 columns in " + path);
    TrajectoryLog log;
    for (const auto& r : table.rows) {
        LogStep s;
        std::size_t c = 0;
        s.t = r[c++];
        for (int i = 0; i < 12; ++i) s.state[i] = r[c++];
        for (int i = 0; i < 12; ++i) s.reference[i] = r[c++];
        for (int i = 0; i < 12; ++i) s.input[i] = r[c++];
        for (int i = 0; i < 6; ++i) s.error[i] = r[c++];
        s.stats.iterations = static_cast<int>(r[c++]);
        s.stats.primal_residual = r[c++];
        s.stats.dual_residual = r[c++];
        s.stats.objective = r[c++];
        log.steps.push_back(s);
    }
    for (const auto& comment : table.comments)
        if (comment == "diverged=1") log.diverged = true;
    if (!log.steps.empty()) log.end_time = log.steps.back().t;
    return log;
}

RunnerOutput run_collect(const RunConfig& config, const std::string& out_dir) {
    ensure_dir(out_dir);
    OutputGuard guard;
    const std::string path = guard.add(out_dir + "/dataset.csv");

    CollectReport report = collect_dataset(make_collect_config(config), config.plant);
    if (report.max_consistency_error > 1e-12)
        throw std::runtime_error("collect: dataset consistency check failed");

    std::stringstream hdr;
    hdr << "config_hash=" << config.config_hash << " seed=" << config.seed
        << " samples=" << report.samples.size() << " skipped=" << report.skipped_instances.size();
    write_dataset_csv(path, report.samples, hdr.str());

    RunnerOutput out;
    out.files.push_back(path);
    std::stringstream ss;
    ss << "collected " << report.samples.size() << " samples from "
       << config.collect_instances - report.skipped_instances.size() << "/"
       << config.collect_instances << " instances (max consistency error "
       << report.max_consistency_error << ")";
    out.summary = ss.str();
    guard.commit();
    return out;
}

RunnerOutput run_identify(const RunConfig& config, const std::string& out_dir,
                          std::optional<double> payload_mass_override) {
    ensure_dir(out_dir);
    OutputGuard guard;
    const std::string trace_path = guard.add(out_dir + "/ident_trace.csv");
    const std::string omega_path = guard.add(out_dir + "/omega.json");

    PayloadTruth payload{payload_mass_override.value_or(config.payload_mass), config.payload_r_p};
    IdentificationResult result = identify_payload(config, payload);

    {
        CsvWriter w(trace_path);
        write_header(w, config);
        w.header({"t", "ebar_x", "ebar_y", "ebar_z", "p_hat_x", "p_hat_y", "p_hat_z", "z_x", "z_y",
                  "z_z"});
        for (const auto& row : result.trace)
            w.row({row.t, row.ebar[0], row.ebar[1], row.ebar[2], row.p_hat[0], row.p_hat[1],
                   row.p_hat[2], row.z[0], row.z[1], row.z[2]});
    }
    {
        nlohmann::json j;
        j["m_p_hat"] = result.omega.m_p_hat;
        j["p_hat"] = {result.omega.p_hat[0], result.omega.p_hat[1], result.omega.p_hat[2]};
        j["converged"] = result.converged;
        j["elapsed_s"] = result.elapsed;
        j["final_ebar_norm"] = result.final_ebar.norm();
        j["config_hash"] = config.config_hash;
        j["seed"] = config.seed;
        std::ofstream out(omega_path);
        out << j.dump(2) << "\n";
    }

    RunnerOutput out;
    out.files = {trace_path, omega_path};
    std::stringstream ss;
    ss << "identified m_p_hat=" << result.omega.m_p_hat << " kg, p_hat=("
       << result.omega.p_hat.transpose() << ") in " << result.elapsed << " s";
    out.summary = ss.str();
    guard.commit();
    return out;
}

RunnerOutput run_train(const RunConfig& config, const std::string& out_dir,
                       const std::string& dataset_path) {
    ensure_dir(out_dir);
    OutputGuard guard;
    const std::string ckpt_path = guard.add(out_dir + "/checkpoint.bin");
    const std::string loss_path = guard.add(out_dir + "/loss.csv");

    const std::string ds = dataset_path.empty() ? out_dir + "/dataset.csv" : dataset_path;
    std::vector<TrainingSample> dataset = read_dataset_csv(ds);

    std::vector<int> sizes = {29};
    for (int h : config.pinn_hidden) sizes.push_back(h);
    sizes.push_back(12);
    Rng rng(config.seed ^ 0x1217ULL);
    MlpModel model = MlpModel::make(sizes, rng);

    CollocationBoxes boxes = CollocationBoxes::from_dataset(dataset);
    PhysicsRhs rhs = PhysicsRhs::identified(config.plant);
    TrainResult result = train(model, dataset, boxes, rhs, config.train);
    if (result.aborted_non_finite)
        throw std::runtime_error("train: aborted on non-finite loss");

    model.save_checkpoint(ckpt_path);
    {
        CsvWriter w(loss_path);
        write_header(w, config);
        w.header({"epoch", "mse_data", "mse_phy", "total"});
        for (const auto& row : result.history)
            w.row({static_cast<double>(row.epoch), row.mse_data, row.mse_phy, row.total});
    }

    RunnerOutput out;
    out.files = {ckpt_path, loss_path};
    std::stringstream ss;
    ss << "trained on " << dataset.size() << " samples: data=" << result.final_data
       << " phy=" << result.final_phy << " total=" << result.final_total
       << " val=" << result.validation_data;
    out.summary = ss.str();
    guard.commit();
    return out;
}

RunnerOutput run_track(const RunConfig& config, const std::string& out_dir,
                       const std::string& checkpoint_path,
                       std::optional<double> payload_mass_override) {
    ensure_dir(out_dir);
    OutputGuard guard;

    PayloadTruth payload{payload_mass_override.value_or(config.payload_mass), config.payload_r_p};

    MlpModel model;
    const MlpModel* model_ptr = nullptr;
    if (config.controller == "opi-pinnpc") {
        model = MlpModel::load_checkpoint(checkpoint_path);
        model_ptr = &model;
    }

    PayloadEstimate omega = identify_payload(config, payload).omega;
    TrajectoryLog log = track_once(config, model_ptr, payload, omega, config.controller);

    const std::string path = guard.add(out_dir + "/track_" + config.controller + ".csv");
    write_trajectory_csv(path, log, config);

    MetricsReport metrics = compute_metrics(log, config.metrics_window_start);
    RunnerOutput out;
    out.files = {path};
    std::stringstream ss;
    ss << config.controller << " payload " << payload.m_p
       << " kg: pos RMSE " << metrics.pos_rmse_norm << " m, ori RMSE " << metrics.ori_rmse_norm
       << " rad" << (log.diverged ? " [DIVERGED]" : "");
    out.summary = ss.str();
    guard.commit();
    return out;
}

std::vector<BenchmarkRow> benchmark_sweep(const RunConfig& config, const MlpModel& model) {
    std::vector<BenchmarkRow> rows(config.benchmark_payloads.size());
    auto run_one = [&](std::size_t i) {
        Rng rng = Rng::derive(config.seed ^ 0xBE7CULL, i);
        PayloadTruth payload;
        payload.m_p = config.benchmark_payloads[i];
        do {
            payload.r_p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) *
                          config.r_p_bound;
        } while (payload.r_p.norm() > config.r_p_bound);

        PayloadEstimate omega = identify_payload(config, payload).omega;
        TrajectoryLog ours = track_once(config, &model, payload, omega, "opi-pinnpc");
        TrajectoryLog base = track_once(config, nullptr, payload, omega, "baseline");
        BenchmarkRow row;
        row.payload_kg = payload.m_p;
        row.ours = compute_metrics(ours, config.metrics_window_start);
        row.baseline = compute_metrics(base, config.metrics_window_start);
        return row;
    };

    std::vector<std::future<BenchmarkRow>> futures;
    futures.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        futures.push_back(std::async(std::launch::async, run_one, i));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = futures[i].get();
    return rows;
}

void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows,
                         const RunConfig& config) {
    CsvWriter w(path);
    write_header(w, config);
    w.header({"payload_kg", "ours_pos_rmse", "ours_ori_rmse", "base_pos_rmse", "base_ori_rmse",
              "ours_pos_rmse_axes", "ours_ori_rmse_axes", "base_pos_rmse_axes",
              "base_ori_rmse_axes", "improvement_pos", "improvement_ori"});
    for (const auto& r : rows) {
        w.row({r.payload_kg, r.ours.pos_rmse_norm, r.ours.ori_rmse_norm, r.baseline.pos_rmse_norm,
               r.baseline.ori_rmse_norm, r.ours.pos_rmse_axes_mean, r.ours.ori_rmse_axes_mean,
               r.baseline.pos_rmse_axes_mean, r.baseline.ori_rmse_axes_mean,
               improvement_ratio(r.ours.pos_rmse_norm, r.baseline.pos_rmse_norm),
               improvement_ratio(r.ours.ori_rmse_norm, r.baseline.ori_rmse_norm)});
    }
}

RunnerOutput run_benchmark(const RunConfig& config, const std::string& out_dir,
                           const std::string& checkpoint_path) {
    ensure_dir(out_dir);
    OutputGuard guard;
    const std::string path = guard.add(out_dir + "/benchmark.csv");

    MlpModel model = MlpModel::load_checkpoint(checkpoint_path);
    std::vector<BenchmarkRow> rows = benchmark_sweep(config, model);
    write_benchmark_csv(path, rows, config);

    double mean_imp_pos = 0, mean_imp_ori = 0;
    for (const auto& r : rows) {
        mean_imp_pos += improvement_ratio(r.ours.pos_rmse_norm, r.baseline.pos_rmse_norm);
        mean_imp_ori += improvement_ratio(r.ours.ori_rmse_norm, r.baseline.ori_rmse_norm);
    }
    mean_imp_pos /= static_cast<double>(rows.size());
    mean_imp_ori /= static_cast<double>(rows.size());

    RunnerOutput out;
    out.files = {path};
    std::stringstream ss;
    ss << "benchmark over " << rows.size() << " payloads: mean improvement pos "
       << 100 * mean_imp_pos << " %, ori " << 100 * mean_imp_ori << " %";
    out.summary = ss.str();
    guard.commit();
    return out;
}

RunnerOutput run_report(const RunConfig& config, const std::string& out_dir) {
    const std::string bench_path = out_dir + "/benchmark.csv";
    if (!fs::exists(bench_path))
        throw std::runtime_error("report: no benchmark.csv under " + out_dir);
    CsvTable table = read_csv(bench_path);
    if (table.rows.empty()) throw std::runtime_error("report: benchmark.csv has no rows");

    OutputGuard guard;
    const std::string pos_path = guard.add(out_dir + "/report_pos_rmse_vs_payload.csv");
    const std::string ori_path = guard.add(out_dir + "/report_ori_rmse_vs_payload.csv");
    const std::string summary_path = guard.add(out_dir + "/report_summary.txt");

    {
        CsvWriter w(pos_path);
        write_header(w, config);
        w.header({"payload_kg", "ours_pos_rmse", "base_pos_rmse"});
        for (const auto& r : table.rows) w.row({r[0], r[1], r[3]});
    }
    {
        CsvWriter w(ori_path);
        write_header(w, config);
        w.header({"payload_kg", "ours_ori_rmse", "base_ori_rmse"});
        for (const auto& r : table.rows) w.row({r[0], r[2], r[4]});
    }

    double mean_imp_pos = 0, mean_imp_ori = 0;
    bool strict = true;
    for (const auto& r : table.rows) {
        mean_imp_pos += r[9];
        mean_imp_ori += r[10];
        strict &= (r[1] < r[3]) && (r[2] < r[4]);
    }
    mean_imp_pos /= static_cast<double>(table.rows.size());
    mean_imp_ori /= static_cast<double>(table.rows.size());

    {
        std::ofstream out(summary_path);
        out << "# OPI-PINNPC vs baseline (identified feedforward + PID stand-in)\n";
        out << "# config_hash=" << config.config_hash << " seed=" << config.seed << "\n";
        out << "payloads: " << table.rows.size() << "\n";
        out << "mean position RMSE improvement: " << fmt_g17(100 * mean_imp_pos) << " %\n";
        out << "mean orientation RMSE improvement: " << fmt_g17(100 * mean_imp_ori) << " %\n";
        out << "strict per-payload dominance: " << (strict ? "yes" : "no") << "\n";
        out << "\npayload_kg  pos_ours  pos_base  ori_ours  ori_base\n";
        for (const auto& r : table.rows)
            out << r[0] << "  " << r[1] << "  " << r[3] << "  " << r[2] << "  " << r[4] << "\n";
    }

    RunnerOutput out;
    out.files = {pos_path, ori_path, summary_path};
    std::stringstream ss;
    ss << "report: mean improvement pos " << 100 * mean_imp_pos << " %, ori "
       << 100 * mean_imp_ori << " %, strict dominance " << (strict ? "yes" : "no");
    out.summary = ss.str();
    guard.commit();
    return out;
}

}  // namespace pinnmpc
