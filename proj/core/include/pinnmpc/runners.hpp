#pragma once

#include <optional>
#include <string>

#include "pinnmpc/config.hpp"
#include "pinnmpc/dataset.hpp"
#include "pinnmpc/metrics.hpp"
#include "pinnmpc/mlp.hpp"
#include "pinnmpc/scenario.hpp"

namespace pinnmpc {

/// Subcommand implementations. Each writes its artifacts under out_dir and
/// removes partially written outputs on failure. All file formats embed the
/// config hash, seed and the verbatim config in a comment header.
struct RunnerOutput {
    std::vector<std::string> files;
    std::string summary;
};

RunnerOutput run_collect(const RunConfig& config, const std::string& out_dir);

RunnerOutput run_identify(const RunConfig& config, const std::string& out_dir,
                          std::optional<double> payload_mass_override = {});

RunnerOutput run_train(const RunConfig& config, const std::string& out_dir,
                       const std::string& dataset_path = "");

RunnerOutput run_track(const RunConfig& config, const std::string& out_dir,
                       const std::string& checkpoint_path,
                       std::optional<double> payload_mass_override = {});

RunnerOutput run_benchmark(const RunConfig& config, const std::string& out_dir,
                           const std::string& checkpoint_path);

RunnerOutput run_report(const RunConfig& config, const std::string& out_dir);

// shared pieces (also used by tests and the acceptance suite)

/// Identification on a fresh standing plant for the given payload.
IdentificationResult identify_payload(const RunConfig& config, const PayloadTruth& payload);

/// One tracking rollout with the chosen controller ("opi-pinnpc" or "baseline").
TrajectoryLog track_once(const RunConfig& config, const MlpModel* model,
                         const PayloadTruth& payload, const PayloadEstimate& omega,
                         const std::string& controller);

void write_trajectory_csv(const std::string& path, const TrajectoryLog& log,
                          const RunConfig& config);
TrajectoryLog read_trajectory_csv(const std::string& path);

struct BenchmarkRow {
    double payload_kg;
    MetricsReport ours, baseline;
};

std::vector<BenchmarkRow> benchmark_sweep(const RunConfig& config, const MlpModel& model);
void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows,
                         const RunConfig& config);

}  // namespace pinnmpc
