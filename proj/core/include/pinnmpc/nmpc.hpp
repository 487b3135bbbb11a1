#pragma once

#include <memory>
#include <vector>

#include "pinnmpc/control.hpp"
#include "pinnmpc/gait.hpp"
#include "pinnmpc/mlp.hpp"
#include "pinnmpc/qp.hpp"
#include "pinnmpc/scenario.hpp"
#include "pinnmpc/types.hpp"

namespace pinnmpc {

/// One-step prediction interface the receding-horizon optimizer sees.
/// The production model wraps the trained surrogate; tests plug exact
/// linear maps.
class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;
    virtual int state_dim() const = 0;
    virtual int input_dim() const = 0;
    virtual Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                    bool* extrapolated = nullptr) const = 0;
    virtual void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::MatrixXd& A, Eigen::MatrixXd& B) const = 0;
};

/// Surrogate adapter: fixes the sampling time and payload parameters and
/// exposes Phi(., ., T, omega) with Jacobians from the network's
/// reverse-mode input gradients.
class MlpDynamicsModel : public DynamicsModel {
public:
    MlpDynamicsModel(const MlpModel& model, double T, const Eigen::Vector4d& omega)
        : model_(model), T_(T), omega_(omega) {}

    int state_dim() const override { return 12; }
    int input_dim() const override { return 12; }
    Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            bool* extrapolated) const override;
    void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                   Eigen::MatrixXd& B) const override;

private:
    const MlpModel& model_;
    double T_;
    Eigen::Vector4d omega_;
};

/// Exact affine map x+ = A x + B u + c (tests, toy plants).
class LinearDynamicsModel : public DynamicsModel {
public:
    LinearDynamicsModel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::VectorXd& c)
        : A_(A), B_(B), c_(c) {}
    int state_dim() const override { return static_cast<int>(A_.rows()); }
    int input_dim() const override { return static_cast<int>(B_.cols()); }
    Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            bool* extrapolated) const override {
        if (extrapolated) *extrapolated = false;
        return A_ * x + B_ * u + c_;
    }
    void jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::MatrixXd& A,
                   Eigen::MatrixXd& B) const override {
        A = A_;
        B = B_;
    }

private:
    Eigen::MatrixXd A_, B_;
    Eigen::VectorXd c_;
};

/// Per-stage affine model x_{i+1} = A_i x_i + B_i u_i + c_i around the
/// nominal trajectory; c_i reproduces the model prediction at the nominal.
struct LinearStage {
    Eigen::MatrixXd A, B;
    Eigen::VectorXd c;
};

struct LinearizationResult {
    std::vector<LinearStage> stages;
    Eigen::MatrixXd nominal_states;  // n x (N+1), column 0 is x_k
    bool extrapolated = false;
};

LinearizationResult linearize_trajectory(const DynamicsModel& model, const Eigen::VectorXd& x0,
                                         const Eigen::MatrixXd& nominal_inputs);

struct NmpcConfig {
    int horizon = 10;
    Eigen::VectorXd q_weights;  // diagonal Q (state dim)
    Eigen::VectorXd r_weights;  // diagonal R on input increments
    Eigen::VectorXd u_min, u_max;
    Eigen::VectorXd du_min, du_max;
    Eigen::VectorXd x_min, x_max;  // softened into the objective
    double soft_state_weight = 1e4;
    double T = 0.01;
    int sqp_iterations = 2;
    AdmmOptions solver;

    void validate(int state_dim, int input_dim) const;
    /// Production defaults for the 12/12 quadruped problem.
    static NmpcConfig quadruped_default();
};

/// Per-stage hard input boxes (contact-aware: swing channels pinned to zero).
struct StageBounds {
    Eigen::MatrixXd lower, upper;  // input_dim x N

    static StageBounds uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int N);
    /// Swing feet get u_min = u_max = 0 over the horizon lookahead.
    static StageBounds contact_aware(const ForceBounds& bounds, const GaitSchedule& gait,
                                     double t0, double T, int N);
};

/// Eliminates states through the affine stage maps. Decision variable is the
/// stacked per-stage input deviation v_i = u_i - u_bar_i; the R cost acts on
/// the exact increments Delta u_i = v_i - v_{i-1} + (u_bar_i - u_bar_{i-1}).
/// State boxes enter as one-sided quadratic penalties where the nominal is
/// outside (or at) a bound.
QpProblem condense(const LinearizationResult& lin, const Eigen::MatrixXd& references,
                   const Eigen::MatrixXd& nominal_inputs, const Eigen::VectorXd& prev_input,
                   const StageBounds& bounds, const NmpcConfig& config);

struct NmpcStepResult {
    Eigen::VectorXd u_opt;            // first-stage input
    Eigen::MatrixXd plan_inputs;      // m x N optimized input sequence
    Eigen::MatrixXd predicted_states; // n x (N+1)
    SolverStats stats;
};

/// SQP loop: linearize -> condense -> ADMM -> update nominal, for the
/// configured iteration count; warm nominal comes from the caller (typically
/// the time-shifted previous plan).
NmpcStepResult nmpc_step(const DynamicsModel& model, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& references, const Eigen::MatrixXd& warm_inputs,
                         const Eigen::VectorXd& prev_input, const StageBounds& bounds,
                         const NmpcConfig& config);

/// Receding-horizon tracking controller: PINN surrogate NMPC feedforward plus
/// the shared PID feedback, composed and clamped per the contact mask.
class PinnMpcController : public Controller {
public:
    PinnMpcController(const MlpModel& model, const RobotParams& params,
                      const PayloadEstimate& omega, const GaitSchedule& gait,
                      const ReferenceGenerator& reference, const NmpcConfig& config,
                      const PidGains& pid_gains, const ForceBounds& bounds);

    ControlInput compute(const ControlContext& ctx) override;
    SolverStats last_stats() const override { return stats_; }
    void reset() override;

private:
    const MlpModel& model_;
    RobotParams params_;
    PayloadEstimate omega_;
    GaitSchedule gait_;
    ReferenceGenerator reference_;
    NmpcConfig config_;
    PidGains pid_gains_;
    ForceBounds bounds_;
    PidState pid_;
    Eigen::MatrixXd plan_;       // previous optimized inputs (warm start)
    Eigen::VectorXd prev_input_;
    bool has_plan_ = false;
    SolverStats stats_;
};

}  // namespace pinnmpc
