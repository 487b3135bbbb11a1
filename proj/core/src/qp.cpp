#include "pinnmpc/qp.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace pinnmpc {

void QpProblem::validate() const {
    const auto n = H.rows();
    if (H.cols() != n || q.size() != n || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("QpProblem: dimension mismatch");
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("QpProblem: bounds not well-ordered");
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("QpProblem: H must be symmetric");
}

AdmmResult admm_solve(const QpProblem& qp, const Eigen::VectorXd* warm_start,
                      const AdmmOptions& options) {
    qp.validate();
    const auto n = qp.H.rows();

    auto clip = [&](const Eigen::VectorXd& v) {
        return v.cwiseMax(qp.lower).cwiseMin(qp.upper);
    };

    double rho = options.rho;
    Eigen::MatrixXd Hreg = qp.H + rho * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> fact(Hreg);

    Eigen::VectorXd z = warm_start ? clip(*warm_start) : clip(Eigen::VectorXd::Zero(n));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x = z;

    AdmmResult result;
    result.solution = z;
    result.objective = qp.objective(z);

    auto consider = [&](const Eigen::VectorXd& candidate) {
        const double obj = qp.objective(candidate);
        if (obj < result.objective) {
            result.objective = obj;
            result.solution = candidate;
        }
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        x = fact.solve(rho * (z - w) - qp.q);
        Eigen::VectorXd z_prev = z;
        z = clip(x + w);
        w += x - z;

        result.iterations = iter;
        if (iter % options.check_interval == 0 || iter == options.max_iterations) {
            result.primal_residual = (x - z).lpNorm<Eigen::Infinity>();
            result.dual_residual = rho * (z - z_prev).lpNorm<Eigen::Infinity>();
            consider(z);
            const double eps_p = options.tol_primal * (1.0 + z.lpNorm<Eigen::Infinity>());
            const double eps_d = options.tol_dual * (1.0 + (qp.H * z + qp.q).lpNorm<Eigen::Infinity>());
            if (result.primal_residual <= eps_p && result.dual_residual <= eps_d) {
                result.converged = true;
                break;
            }
            if (options.adaptive_rho) {
                double new_rho = rho;
                if (result.primal_residual > 10.0 * result.dual_residual) new_rho = rho * 2.0;
                else if (result.dual_residual > 10.0 * result.primal_residual) new_rho = rho * 0.5;
                if (new_rho != rho) {
                    w *= rho / new_rho;  // keep the unscaled dual y = rho * w fixed
                    rho = new_rho;
                    Hreg = qp.H + rho * Eigen::MatrixXd::Identity(n, n);
                    fact.compute(Hreg);
                }
            }
        }
    }
    consider(z);
    return result;
}

}  // namespace pinnmpc
