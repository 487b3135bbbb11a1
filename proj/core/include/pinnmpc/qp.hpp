#pragma once

#include <Eigen/Dense>

namespace pinnmpc {

/// Condensed dense box-constrained QP:  min 1/2 v^T H v + q^T v,
/// lower <= v <= upper. Decision variables are stacked per-stage input
/// deviations; the metadata maps them back to stage inputs.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd q;
    Eigen::VectorXd lower, upper;

    int horizon = 0;
    int input_dim = 0;
    Eigen::VectorXd nominal_inputs;  // stacked u_bar per stage
    Eigen::VectorXd prev_input;      // u_{k-1}

    void validate() const;
    double objective(const Eigen::VectorXd& v) const {
        return 0.5 * v.dot(H * v) + q.dot(v);
    }
};

struct AdmmOptions {
    double rho = 0.1;
    bool adaptive_rho = true;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    int max_iterations = 4000;
    int check_interval = 10;
};

struct AdmmResult {
    Eigen::VectorXd solution;  // projected iterate: inside the box exactly
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    double objective = 0.0;
};

/// First-order operator-splitting solve of the box QP. The returned solution
/// is the best (by objective) projected iterate, so it is box-feasible and
/// never worse than the warm start.
AdmmResult admm_solve(const QpProblem& qp, const Eigen::VectorXd* warm_start = nullptr,
                      const AdmmOptions& options = {});

}  // namespace pinnmpc
