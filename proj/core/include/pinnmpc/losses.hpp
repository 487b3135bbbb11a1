#pragma once

#include <functional>
#include <vector>

#include "pinnmpc/dataset.hpp"
#include "pinnmpc/mlp.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Continuous right-hand side enforced by the physics loss, with its state
/// Jacobian (analytic for the identified SRB dynamics; tests plug custom ones).
struct PhysicsRhs {
    std::function<Vec12(const Vec12& x, const Vec12& u, const Eigen::Vector4d& omega)> value;
    std::function<Mat12(const Vec12& x, const Vec12& u, const Eigen::Vector4d& omega)> jacobian_x;

    /// f_bar(x,u) + f_hat(omega) with feet at nominal hip projections.
    static PhysicsRhs identified(const RobotParams& params);
};

/// Unlabeled sample; only the physics residual is penalized here.
struct CollocationPoint {
    Vec12 x = Vec12::Zero();
    Vec12 u = Vec12::Zero();
    double T = 0.01;
    PayloadEstimate omega_hat;

    Eigen::Matrix<double, 29, 1> features() const {
        Eigen::Matrix<double, 29, 1> f;
        f << x, u, T, omega_hat.to_vector();
        return f;
    }
};

struct CollocationBoxes {
    Vec12 x_lo = Vec12::Constant(-1), x_hi = Vec12::Constant(1);
    Vec12 u_lo = Vec12::Constant(-100), u_hi = Vec12::Constant(100);
    double t_lo = 0.005, t_hi = 0.05;
    Eigen::Vector4d w_lo = Eigen::Vector4d::Zero(), w_hi = Eigen::Vector4d::Ones();

    void validate() const;
    /// Envelope of the dataset features, widened by `margin` of each span.
    static CollocationBoxes from_dataset(const std::vector<TrainingSample>& samples,
                                         double margin = 0.05);
};

/// Uniform i.i.d. draws inside the boxes; reproducible under the seed.
std::vector<CollocationPoint> sample_collocation(std::size_t count, const CollocationBoxes& boxes,
                                                 std::uint64_t seed);

struct LossValue {
    double value = 0.0;
    MlpModel::Gradients grads;
};

/// MSE_data = (1/N) sum ||Phi(v_i) - x_next_i||^2 in normalized output space.
LossValue data_loss(const MlpModel& model, const std::vector<TrainingSample>& batch,
                    bool with_grads = true);

/// MSE_phy = (1/N) sum ||d(y_n)/d(T_n) - (sigma_T / sigma_out) . f(Phi(v_i), u_i, omega_i)||^2:
/// the network's time-derivative must satisfy the identified continuous
/// dynamics at the predicted state, measured in normalized coordinates.
LossValue physics_loss(const MlpModel& model, const std::vector<CollocationPoint>& batch,
                       const PhysicsRhs& rhs, bool with_grads = true);

}  // namespace pinnmpc
