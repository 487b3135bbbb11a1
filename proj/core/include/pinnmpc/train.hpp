#pragma once

#include <cstdint>
#include <vector>

#include "pinnmpc/losses.hpp"
#include "pinnmpc/mlp.hpp"

namespace pinnmpc {

struct TrainConfig {
    double adam_lr = 1e-3;
    int adam_epochs = 5000;
    int batch_size = 256;
    int lbfgs_memory = 20;
    int lbfgs_max_iterations = 200;
    double physics_weight = 1.0;
    std::size_t collocation_count = 2048;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(adam_lr > 0)) throw std::invalid_argument("TrainConfig: adam_lr must be > 0");
        if (adam_epochs < 0) throw std::invalid_argument("TrainConfig: adam_epochs must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (validation_fraction < 0 || validation_fraction >= 1)
            throw std::invalid_argument("TrainConfig: validation_fraction in [0,1)");
    }
};

struct LossHistoryRow {
    int epoch;
    double mse_data;
    double mse_phy;
    double total;
};

struct TrainResult {
    std::vector<LossHistoryRow> history;
    double final_data = 0.0;
    double final_phy = 0.0;
    double final_total = 0.0;
    double validation_data = 0.0;
    std::vector<TrainingSample> validation_split;
    bool aborted_non_finite = false;
};

/// Fits normalization to the training split, runs the Adam phase on
/// minibatches of the dual loss (data + physics_weight * physics) and then
/// the L-BFGS full-batch refinement. Deterministic under (config.seed,
/// fixed reduction order). A non-finite loss aborts, restoring the last
/// finite parameters.
TrainResult train(MlpModel& model, const std::vector<TrainingSample>& dataset,
                  const CollocationBoxes& boxes, const PhysicsRhs& rhs,
                  const TrainConfig& config);

}  // namespace pinnmpc
