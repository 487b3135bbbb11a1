#include "pinnmpc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnmpc {

MetricsReport compute_metrics(const TrajectoryLog& log, double window_start) {
    if (log.steps.empty()) throw std::invalid_argument("compute_metrics: empty log");
    if (window_start > log.steps.back().t)
        throw std::invalid_argument("compute_metrics: window exceeds log length");

    MetricsReport report;
    report.window_start = window_start;
    Vec3 pos_sq = Vec3::Zero(), ori_sq = Vec3::Zero();
    double pos_norm_sq = 0.0, ori_norm_sq = 0.0;

    for (const auto& step : log.steps) {
        if (step.t < window_start) continue;
        const Vec3 pe = step.error.segment<3>(0);
        const Vec3 oe = step.error.segment<3>(3);
        report.t.push_back(step.t);
        report.pos_norm.push_back(pe.norm());
        report.ori_norm.push_back(oe.norm());
        pos_sq += pe.cwiseProduct(pe);
        ori_sq += oe.cwiseProduct(oe);
        pos_norm_sq += pe.squaredNorm();
        ori_norm_sq += oe.squaredNorm();
        ++report.window_samples;
    }
    if (report.window_samples == 0)
        throw std::invalid_argument("compute_metrics: empty evaluation window");

    const double n = static_cast<double>(report.window_samples);
    report.pos_rmse_axes = (pos_sq / n).cwiseSqrt();
    report.ori_rmse_axes = (ori_sq / n).cwiseSqrt();
    report.pos_rmse_norm = std::sqrt(pos_norm_sq / n);
    report.ori_rmse_norm = std::sqrt(ori_norm_sq / n);
    report.pos_rmse_axes_mean = report.pos_rmse_axes.mean();
    report.ori_rmse_axes_mean = report.ori_rmse_axes.mean();
    return report;
}

double improvement_ratio(double ours, double baseline) {
    if (baseline == 0.0) return 0.0;
    return 1.0 - ours / baseline;
}

}  // namespace pinnmpc
