#include "pinnmpc/train.hpp"

#include <cmath>
#include <numeric>

#include "pinnmpc/lbfgs.hpp"
#include "pinnmpc/rng.hpp"

namespace pinnmpc {

namespace {

struct Adam {
    Eigen::VectorXd m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;

    explicit Adam(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
        ++t;
        m = beta1 * m + (1 - beta1) * grad;
        v = beta2 * v + (1 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        theta -= (lr / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());
    }
};

}  // namespace

TrainResult train(MlpModel& model, const std::vector<TrainingSample>& dataset,
                  const CollocationBoxes& boxes, const PhysicsRhs& rhs,
                  const TrainConfig& config) {
    config.validate();
    if (dataset.empty()) throw std::invalid_argument("train: dataset must be non-empty");

    TrainResult result;

    // seeded split
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = Rng::derive(config.seed, 0x51);
    shuffle(order, split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::floor(config.validation_fraction * static_cast<double>(dataset.size())));
    std::vector<TrainingSample> train_set, val_set;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_val ? val_set : train_set).push_back(dataset[order[i]]);
    result.validation_split = val_set;

    // normalization from the training split
    Eigen::MatrixXd feats(29, static_cast<Eigen::Index>(train_set.size()));
    Eigen::MatrixXd labels(12, static_cast<Eigen::Index>(train_set.size()));
    double t_lo = train_set.front().T, t_hi = train_set.front().T;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        feats.col(static_cast<Eigen::Index>(i)) = train_set[i].features();
        labels.col(static_cast<Eigen::Index>(i)) = train_set[i].x_next;
        t_lo = std::min(t_lo, train_set[i].T);
        t_hi = std::max(t_hi, train_set[i].T);
    }
    fit_normalization(feats, model.in_mean, model.in_scale);
    fit_normalization(labels, model.out_mean, model.out_scale);
    model.t_min = t_lo;
    model.t_max = t_hi;

    const std::vector<CollocationPoint> colloc =
        sample_collocation(config.collocation_count, boxes, config.seed ^ 0xC0110CULL);
    const bool use_physics = config.physics_weight > 0 && !colloc.empty();

    Eigen::VectorXd theta = model.parameters();
    Eigen::VectorXd last_good = theta;
    Adam adam(theta.size());

    const auto n_train = train_set.size();
    const auto bsz = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> idx(n_train);
    std::iota(idx.begin(), idx.end(), 0);

    std::size_t colloc_cursor = 0;
    auto next_colloc_batch = [&](std::size_t count) {
        std::vector<CollocationPoint> batch;
        batch.reserve(count);
        for (std::size_t i = 0; i < count && !colloc.empty(); ++i)
            batch.push_back(colloc[(colloc_cursor + i) % colloc.size()]);
        colloc_cursor = colloc.empty() ? 0 : (colloc_cursor + count) % colloc.size();
        return batch;
    };

    for (int epoch = 0; epoch < config.adam_epochs; ++epoch) {
        Rng epoch_rng = Rng::derive(config.seed, 0xE60C000ULL + static_cast<std::uint64_t>(epoch));
        shuffle(idx, epoch_rng);

        double epoch_data = 0, epoch_phy = 0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n_train; start += bsz) {
            const std::size_t end = std::min(start + bsz, n_train);
            std::vector<TrainingSample> batch(end - start);
            for (std::size_t i = start; i < end; ++i) batch[i - start] = train_set[idx[i]];

            LossValue dl = data_loss(model, batch);
            Eigen::VectorXd grad = MlpModel::flatten(dl.grads);
            double phy_value = 0.0;
            if (use_physics) {
                LossValue pl = physics_loss(model, next_colloc_batch(bsz), rhs);
                grad += config.physics_weight * MlpModel::flatten(pl.grads);
                phy_value = pl.value;
            }
            const double total = dl.value + config.physics_weight * phy_value;
            if (!std::isfinite(total)) {
                model.set_parameters(last_good);
                result.aborted_non_finite = true;
                return result;
            }
            last_good = theta;
            adam.step(theta, grad, config.adam_lr);
            model.set_parameters(theta);
            epoch_data += dl.value;
            epoch_phy += phy_value;
            ++n_batches;
        }
        const double nd = epoch_data / static_cast<double>(n_batches);
        const double np = epoch_phy / static_cast<double>(n_batches);
        result.history.push_back({epoch, nd, np, nd + config.physics_weight * np});
    }

    // L-BFGS refinement on the full-batch objective
    if (config.lbfgs_max_iterations > 0) {
        double last_dl = 0.0, last_pl = 0.0;
        auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            model.set_parameters(x);
            LossValue dl = data_loss(model, train_set);
            grad = MlpModel::flatten(dl.grads);
            double value = dl.value;
            last_dl = dl.value;
            last_pl = 0.0;
            if (use_physics) {
                LossValue pl = physics_loss(model, colloc, rhs);
                grad += config.physics_weight * MlpModel::flatten(pl.grads);
                value += config.physics_weight * pl.value;
                last_pl = pl.value;
            }
            return value;
        };
        LbfgsOptions opts;
        opts.memory = config.lbfgs_memory;
        opts.max_iterations = config.lbfgs_max_iterations;
        int row = config.adam_epochs;
        auto cb = [&](int, double f, const Eigen::VectorXd& x) {
            if (!std::isfinite(f)) return false;
            last_good = x;
            result.history.push_back({row++, last_dl, last_pl, f});
            return true;
        };
        lbfgs_minimize(objective, theta, opts, cb);
        if (!theta.allFinite()) {
            theta = last_good;
            result.aborted_non_finite = true;
        }
        model.set_parameters(theta);
    }

    LossValue dl = data_loss(model, train_set, false);
    result.final_data = dl.value;
    result.final_phy = use_physics ? physics_loss(model, colloc, rhs, false).value : 0.0;
    result.final_total = result.final_data + config.physics_weight * result.final_phy;
    result.validation_data = val_set.empty() ? 0.0 : data_loss(model, val_set, false).value;
    return result;
}

}  // namespace pinnmpc
