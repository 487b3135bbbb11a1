#include "pinnmpc/losses.hpp"

#include <memory>
#include <stdexcept>

#include "pinnmpc/dynamics.hpp"
#include "pinnmpc/rng.hpp"

namespace pinnmpc {

PhysicsRhs PhysicsRhs::identified(const RobotParams& params) {
    auto dyn = std::make_shared<IdentifiedDynamics>(IdentifiedDynamics{params});
    PhysicsRhs rhs;
    rhs.value = [dyn](const Vec12& x, const Vec12& u, const Eigen::Vector4d& w) {
        return dyn->value(x, u, w);
    };
    rhs.jacobian_x = [dyn](const Vec12& x, const Vec12& u, const Eigen::Vector4d& w) {
        return dyn->jacobian_x(x, u, w);
    };
    return rhs;
}

void CollocationBoxes::validate() const {
    if ((x_lo.array() > x_hi.array()).any() || (u_lo.array() > u_hi.array()).any() ||
        (w_lo.array() > w_hi.array()).any() || t_lo > t_hi)
        throw std::invalid_argument("CollocationBoxes: bounds not well-ordered");
}

CollocationBoxes CollocationBoxes::from_dataset(const std::vector<TrainingSample>& samples,
                                                double margin) {
    if (samples.empty()) throw std::invalid_argument("CollocationBoxes: empty dataset");
    Eigen::Matrix<double, 29, 1> lo = samples.front().features();
    Eigen::Matrix<double, 29, 1> hi = lo;
    for (const auto& s : samples) {
        lo = lo.cwiseMin(s.features());
        hi = hi.cwiseMax(s.features());
    }
    Eigen::Matrix<double, 29, 1> pad = margin * (hi - lo);
    lo -= pad;
    hi += pad;
    CollocationBoxes b;
    b.x_lo = lo.segment<12>(0);
    b.x_hi = hi.segment<12>(0);
    b.u_lo = lo.segment<12>(12);
    b.u_hi = hi.segment<12>(12);
    b.t_lo = lo[24];
    b.t_hi = hi[24];
    b.w_lo = lo.segment<4>(25);
    b.w_hi = hi.segment<4>(25);
    return b;
}

std::vector<CollocationPoint> sample_collocation(std::size_t count, const CollocationBoxes& boxes,
                                                 std::uint64_t seed) {
    boxes.validate();
    Rng rng(seed);
    std::vector<CollocationPoint> points;
    points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CollocationPoint p;
        for (int d = 0; d < 12; ++d) p.x[d] = rng.uniform(boxes.x_lo[d], boxes.x_hi[d]);
        for (int d = 0; d < 12; ++d) p.u[d] = rng.uniform(boxes.u_lo[d], boxes.u_hi[d]);
        p.T = rng.uniform(boxes.t_lo, boxes.t_hi);
        Eigen::Vector4d w;
        for (int d = 0; d < 4; ++d) w[d] = rng.uniform(boxes.w_lo[d], boxes.w_hi[d]);
        p.omega_hat = PayloadEstimate::from_vector(w);
        points.push_back(p);
    }
    return points;
}

LossValue data_loss(const MlpModel& model, const std::vector<TrainingSample>& batch,
                    bool with_grads) {
    if (batch.empty()) throw std::invalid_argument("data_loss: batch must be non-empty");
    const auto B = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd Vn(29, B), Yn(12, B);
    for (Eigen::Index j = 0; j < B; ++j) {
        const auto& s = batch[static_cast<std::size_t>(j)];
        Vn.col(j) = model.normalize_input(s.features());
        Yn.col(j) = model.normalize_output(s.x_next);
    }

    LossValue out;
    const double inv_n = 1.0 / static_cast<double>(B);
    if (!with_grads) {
        Eigen::MatrixXd pred = model.forward_normalized(Vn);
        out.value = (pred - Yn).squaredNorm() * inv_n;
        return out;
    }
    MlpModel::Cache cache;
    Eigen::MatrixXd pred = model.forward_normalized(Vn, &cache);
    Eigen::MatrixXd err = pred - Yn;
    out.value = err.squaredNorm() * inv_n;
    out.grads.init_like(model);
    model.backward_normalized(cache, 2.0 * inv_n * err, &out.grads);
    return out;
}

LossValue physics_loss(const MlpModel& model, const std::vector<CollocationPoint>& batch,
                       const PhysicsRhs& rhs, bool with_grads) {
    if (batch.empty()) throw std::invalid_argument("physics_loss: batch must be non-empty");
    if (model.input_dim() != 29 || model.output_dim() != 12)
        throw std::logic_error("physics_loss: expects the 29->12 surrogate layout");
    const auto B = static_cast<Eigen::Index>(batch.size());
    const double sigma_t = model.in_scale[MlpModel::kTimeIndex];

    Eigen::MatrixXd Vn(29, B);
    for (Eigen::Index j = 0; j < B; ++j)
        Vn.col(j) = model.normalize_input(batch[static_cast<std::size_t>(j)].features());
    Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(29, B);
    tangent.row(MlpModel::kTimeIndex).setOnes();

    MlpModel::DualCache cache;
    auto [yn, dyn_dtn] = model.jvp_normalized(Vn, tangent, with_grads ? &cache : nullptr);

    const double inv_n = 1.0 / static_cast<double>(B);
    Eigen::MatrixXd rho(12, B);
    Eigen::MatrixXd upstream_y = Eigen::MatrixXd::Zero(12, B);
    LossValue out;
    for (Eigen::Index j = 0; j < B; ++j) {
        const auto& p = batch[static_cast<std::size_t>(j)];
        Vec12 predicted = model.denormalize_output(yn.col(j));
        Vec12 f = rhs.value(predicted, p.u, p.omega_hat.to_vector());
        Vec12 h = sigma_t * f.cwiseQuotient(model.out_scale);
        rho.col(j) = dyn_dtn.col(j) - h;
        if (with_grads) {
            // d h / d y_n = sigma_t * S_out^{-1} J_f S_out; upstream on y_n is -(2/B) (dh/dy_n)^T rho
            Mat12 Jf = rhs.jacobian_x(predicted, p.u, p.omega_hat.to_vector());
            Vec12 v = rho.col(j).cwiseQuotient(model.out_scale);
            upstream_y.col(j) =
                -2.0 * inv_n * sigma_t * model.out_scale.cwiseProduct(Jf.transpose() * v);
        }
    }
    out.value = rho.squaredNorm() * inv_n;
    if (with_grads) {
        out.grads.init_like(model);
        model.jvp_backward_normalized(cache, upstream_y, 2.0 * inv_n * rho, &out.grads);
    }
    return out;
}

}  // namespace pinnmpc
