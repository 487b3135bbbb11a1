#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pinnmpc/rng.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// Multilayer perceptron with rectified-linear hidden layers, identity
/// output, and per-feature input/output normalization. The production
/// surrogate is [29, 96, 96, 96, 12] over (x_k, u_k, T, omega_hat) -> x_{k+1};
/// sizes are free so tests can run small nets.
///
/// All training math runs in normalized space on column-batched matrices.
/// Raw-space wrappers handle the (de)normalization chain, including for
/// gradients.
struct MlpModel {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd in_mean, in_scale;   // scale strictly positive
    Eigen::VectorXd out_mean, out_scale;
    double t_min = 0.0, t_max = 1.0;     // training range of the T input

    static constexpr int kTimeIndex = 24;  // x(12) + u(12), then T, then omega(4)

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int n_layers() const { return static_cast<int>(weights.size()); }

    /// He-initialized network with identity normalization.
    static MlpModel make(const std::vector<int>& sizes, Rng& rng);

    void validate() const;

    // -- normalized-space core ------------------------------------------------

    struct Cache {
        Eigen::MatrixXd input;                 // normalized input batch
        std::vector<Eigen::MatrixXd> preacts;  // z_l
        std::vector<Eigen::MatrixXd> acts;     // a_l (post-activation)
    };

    struct Gradients {
        std::vector<Eigen::MatrixXd> dW;
        std::vector<Eigen::VectorXd> db;

        void init_like(const MlpModel& m);
        void add_scaled(const Gradients& other, double s);
        void scale(double s);
    };

    /// y_n = net(v_n); records the cache when requested.
    Eigen::MatrixXd forward_normalized(const Eigen::MatrixXd& vn, Cache* cache = nullptr) const;

    /// Reverse pass for dL/dy_n; accumulates parameter grads, returns dL/dv_n.
    Eigen::MatrixXd backward_normalized(const Cache& cache, const Eigen::MatrixXd& upstream,
                                        Gradients* grads = nullptr) const;

    struct DualCache {
        Cache primal;
        Eigen::MatrixXd tangent_in;             // s_0
        std::vector<Eigen::MatrixXd> tangent_pre;  // t_l = W_l s_{l-1}
        std::vector<Eigen::MatrixXd> tangent;      // s_l = relu'(z_l) . t_l
    };

    /// Forward with a tangent direction: returns (y_n, dy_n/d direction).
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> jvp_normalized(const Eigen::MatrixXd& vn,
                                                               const Eigen::MatrixXd& tangent_in,
                                                               DualCache* cache = nullptr) const;

    /// Reverse pass through the dual (primal + tangent) graph. upstream_y acts
    /// on y_n, upstream_s on the tangent output s_L. Exact a.e. (the
    /// rectifier mask is piecewise constant). Returns dL/dv_n.
    Eigen::MatrixXd jvp_backward_normalized(const DualCache& cache,
                                            const Eigen::MatrixXd& upstream_y,
                                            const Eigen::MatrixXd& upstream_s,
                                            Gradients* grads = nullptr) const;

    // -- raw-space wrappers ---------------------------------------------------

    Eigen::VectorXd normalize_input(const Eigen::VectorXd& v) const;
    Eigen::VectorXd denormalize_output(const Eigen::VectorXd& yn) const;
    Eigen::VectorXd normalize_output(const Eigen::VectorXd& y) const;

    struct Prediction {
        Vec12 x_next;
        bool extrapolated = false;  // T outside the training range
    };

    /// Surrogate evaluation Phi(x_k, u_k, T, omega_hat) for the 29-input net.
    Prediction predict(const Vec12& x, const Vec12& u, double T,
                       const Eigen::Vector4d& omega) const;

    /// d(raw output)/d(raw input), output_dim x input_dim.
    Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& v) const;

    // -- parameter vector (optimizers) ---------------------------------------

    Eigen::Index parameter_count() const;
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
    static Eigen::VectorXd flatten(const Gradients& grads);

    // -- checkpoint I/O -------------------------------------------------------

    void save_checkpoint(const std::string& path) const;
    static MlpModel load_checkpoint(const std::string& path);
};

/// Per-feature mean/std (std floored) from column samples.
void fit_normalization(const Eigen::MatrixXd& features, Eigen::VectorXd& mean,
                       Eigen::VectorXd& scale, double floor = 1e-8);

}  // namespace pinnmpc
