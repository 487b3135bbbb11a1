#pragma once

#include <vector>

#include "pinnmpc/scenario.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Tracking-error statistics over an evaluation window. Both RMSE variants
/// are reported: RMSE of the error norm and the per-axis RMSE (plus its
/// mean over axes).
struct MetricsReport {
    std::vector<double> t;
    std::vector<double> pos_norm, ori_norm;      // error-norm series
    Vec3 pos_rmse_axes = Vec3::Zero();           // per-axis RMSE over the window
    Vec3 ori_rmse_axes = Vec3::Zero();
    double pos_rmse_norm = 0.0;                  // sqrt(mean ||e||^2)
    double ori_rmse_norm = 0.0;
    double pos_rmse_axes_mean = 0.0;
    double ori_rmse_axes_mean = 0.0;
    double window_start = 0.0;
    std::size_t window_samples = 0;
};

/// Errors come from the log's per-step (state - reference) fields; the
/// window [window_start, end] excludes settling transients.
MetricsReport compute_metrics(const TrajectoryLog& log, double window_start);

/// 1 - ours/baseline (positive = improvement).
double improvement_ratio(double ours, double baseline);

}  // namespace pinnmpc
