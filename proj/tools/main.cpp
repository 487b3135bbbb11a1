#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pinnmpc/config.hpp"
#include "pinnmpc/runners.hpp"

namespace {

pinnmpc::RunConfig load_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
    pinnmpc::RunConfig config = config_path.empty()
                                    ? pinnmpc::RunConfig::from_text(
                                          pinnmpc::RunConfig::default_text(seed.value_or(1)))
                                    : pinnmpc::RunConfig::from_file(config_path);
    if (seed) {
        config.seed = *seed;
        config.train.seed = *seed;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"payload-adaptive quadruped control: identification, PINN surrogate, NMPC"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", checkpoint, dataset;
    std::optional<std::uint64_t> seed;
    std::optional<double> payload;

    app.add_option("--config", config_path, "configuration file (INI sections)");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "output directory");

    auto* collect = app.add_subcommand("collect", "generate the labeled training dataset");
    auto* identify = app.add_subcommand("identify", "run online payload identification once");
    identify->add_option("--payload", payload, "payload mass [kg]");
    auto* train = app.add_subcommand("train", "train the surrogate on a collected dataset");
    train->add_option("--dataset", dataset, "dataset CSV (default <out>/dataset.csv)");
    auto* track = app.add_subcommand("track", "run one tracking scenario");
    track->add_option("--payload", payload, "payload mass [kg]");
    track->add_option("--checkpoint", checkpoint, "trained model checkpoint");
    auto* benchmark = app.add_subcommand("benchmark", "payload sweep: OPI-PINNPC vs baseline");
    benchmark->add_option("--checkpoint", checkpoint, "trained model checkpoint");
    auto* report = app.add_subcommand("report", "summarize benchmark outputs in <out>");

    CLI11_PARSE(app, argc, argv);

    try {
        pinnmpc::RunConfig config = load_config(config_path, seed);
        pinnmpc::RunnerOutput result;
        if (collect->parsed()) result = pinnmpc::run_collect(config, out_dir);
        else if (identify->parsed()) result = pinnmpc::run_identify(config, out_dir, payload);
        else if (train->parsed()) result = pinnmpc::run_train(config, out_dir, dataset);
        else if (track->parsed()) {
            if (checkpoint.empty() && config.controller == "opi-pinnpc") {
                std::cerr << "error: track with the opi-pinnpc controller needs --checkpoint\n";
                return 2;
            }
            result = pinnmpc::run_track(config, out_dir, checkpoint, payload);
        } else if (benchmark->parsed()) {
            if (checkpoint.empty()) {
                std::cerr << "error: benchmark needs --checkpoint\n";
                return 2;
            }
            result = pinnmpc::run_benchmark(config, out_dir, checkpoint);
        } else if (report->parsed()) {
            result = pinnmpc::run_report(config, out_dir);
        }
        std::cout << result.summary << "\n";
        for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
