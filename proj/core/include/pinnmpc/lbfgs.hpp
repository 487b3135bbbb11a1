#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pinnmpc {

/// Limited-memory BFGS with two-loop recursion and a strong-Wolfe line
/// search (bracket + zoom). Generic over the objective so both the PINN
/// refinement phase and small test problems use the same code.
struct LbfgsOptions {
    int memory = 20;
    int max_iterations = 200;
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature
    double grad_tolerance = 1e-10;  // on ||g||_inf
    int max_line_search = 40;
};

struct LbfgsResult {
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

/// Objective fills the gradient and returns f(x).
using LbfgsObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Per-iteration callback (iteration index, f, x). Return false to stop.
using LbfgsCallback = std::function<bool(int, double, const Eigen::VectorXd&)>;

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, Eigen::VectorXd& x,
                           const LbfgsOptions& options = {},
                           const LbfgsCallback& callback = nullptr);

}  // namespace pinnmpc
