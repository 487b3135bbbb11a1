#include "pinnmpc/nmpc.hpp"

#include <stdexcept>

namespace pinnmpc {

Eigen::VectorXd MlpDynamicsModel::predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                          bool* extrapolated) const {
    MlpModel::Prediction p = model_.predict(x, u, T_, omega_);
    if (extrapolated) *extrapolated = p.extrapolated;
    return p.x_next;
}

void MlpDynamicsModel::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
    Eigen::VectorXd v(29);
    v << x, u, T_, omega_;
    Eigen::MatrixXd J = model_.input_jacobian(v);
    A = J.block(0, 0, 12, 12);
    B = J.block(0, 12, 12, 12);
}

LinearizationResult linearize_trajectory(const DynamicsModel& model, const Eigen::VectorXd& x0,
                                         const Eigen::MatrixXd& nominal_inputs) {
    const int n = model.state_dim();
    const int m = model.input_dim();
    const auto N = static_cast<int>(nominal_inputs.cols());
    if (x0.size() != n || nominal_inputs.rows() != m)
        throw std::invalid_argument("linearize_trajectory: dimension mismatch");

    LinearizationResult out;
    out.nominal_states.resize(n, N + 1);
    out.nominal_states.col(0) = x0;
    out.stages.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd xi = out.nominal_states.col(i);
        const Eigen::VectorXd ui = nominal_inputs.col(i);
        bool flagged = false;
        Eigen::VectorXd xn = model.predict(xi, ui, &flagged);
        out.extrapolated |= flagged;
        LinearStage stage;
        model.jacobians(xi, ui, stage.A, stage.B);
        stage.c = xn - stage.A * xi - stage.B * ui;
        out.stages.push_back(std::move(stage));
        out.nominal_states.col(i + 1) = xn;
    }
    return out;
}

void NmpcConfig::validate(int state_dim, int input_dim) const {
    if (horizon < 1) throw std::invalid_argument("NmpcConfig: horizon must be >= 1");
    if (q_weights.size() != state_dim || r_weights.size() != input_dim)
        throw std::invalid_argument("NmpcConfig: weight dimensions mismatch");
    if ((q_weights.array() < 0).any()) throw std::invalid_argument("NmpcConfig: Q must be >= 0");
    if ((r_weights.array() <= 0).any()) throw std::invalid_argument("NmpcConfig: R must be > 0");
    if ((u_min.array() > u_max.array()).any() || (du_min.array() > du_max.array()).any() ||
        (x_min.array() > x_max.array()).any())
        throw std::invalid_argument("NmpcConfig: bounds not well-ordered");
    if (sqp_iterations < 1) throw std::invalid_argument("NmpcConfig: sqp_iterations must be >= 1");
}

NmpcConfig NmpcConfig::quadruped_default() {
    NmpcConfig c;
    c.horizon = 10;
    c.q_weights = (Eigen::VectorXd(12) << 600, 600, 900, 500, 500, 500, 20, 20, 20, 10, 10, 10)
                      .finished();
    c.r_weights = Eigen::VectorXd::Constant(12, 1e-5);
    ForceBounds fb;
    c.u_min = fb.lower.replicate(4, 1);
    c.u_max = fb.upper.replicate(4, 1);
    c.du_min = Eigen::VectorXd::Constant(12, -500.0);
    c.du_max = Eigen::VectorXd::Constant(12, 500.0);
    c.x_min = (Eigen::VectorXd(12) << -50, -50, 0.05, -10, -10, -10, -20, -20, -20, -50, -50, -50)
                  .finished();
    c.x_max = (Eigen::VectorXd(12) << 50, 50, 1.0, 10, 10, 10, 20, 20, 20, 50, 50, 50).finished();
    return c;
}

StageBounds StageBounds::uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int N) {
    StageBounds b;
    b.lower = lo.replicate(1, N);
    b.upper = hi.replicate(1, N);
    return b;
}

StageBounds StageBounds::contact_aware(const ForceBounds& bounds, const GaitSchedule& gait,
                                       double t0, double T, int N) {
    StageBounds b;
    b.lower.resize(12, N);
    b.upper.resize(12, N);
    for (int i = 0; i < N; ++i) {
        ContactMask mask = gait_mask_at(t0 + static_cast<double>(i) * T, gait);
        for (int leg = 0; leg < kNumLegs; ++leg) {
            const auto li = static_cast<std::size_t>(leg);
            if (mask[li]) {
                b.lower.block<3, 1>(3 * leg, i) = bounds.lower;
                b.upper.block<3, 1>(3 * leg, i) = bounds.upper;
            } else {
                b.lower.block<3, 1>(3 * leg, i).setZero();
                b.upper.block<3, 1>(3 * leg, i).setZero();
            }
        }
    }
    return b;
}

QpProblem condense(const LinearizationResult& lin, const Eigen::MatrixXd& references,
                   const Eigen::MatrixXd& nominal_inputs, const Eigen::VectorXd& prev_input,
                   const StageBounds& bounds, const NmpcConfig& config) {
    const auto N = static_cast<int>(lin.stages.size());
    const int n = static_cast<int>(lin.stages.front().A.rows());
    const int m = static_cast<int>(lin.stages.front().B.cols());
    if (references.cols() != N || references.rows() != n)
        throw std::invalid_argument("condense: reference sequence must be n x N");
    if (nominal_inputs.cols() != N || nominal_inputs.rows() != m || prev_input.size() != m)
        throw std::invalid_argument("condense: nominal input dimensions mismatch");
    const int size = N * m;

    // sensitivity of stacked states x_1..x_N to stacked deviations v
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N * n, size);
    for (int j = 0; j < N; ++j) {
        Eigen::MatrixXd P = lin.stages[static_cast<std::size_t>(j)].B;
        M.block(j * n, j * m, n, m) = P;
        for (int i = j + 1; i < N; ++i) {
            P = lin.stages[static_cast<std::size_t>(i)].A * P;
            M.block(i * n, j * m, n, m) = P;
        }
    }

    Eigen::VectorXd d(N * n), ref(N * n);
    for (int i = 0; i < N; ++i) {
        d.segment(i * n, n) = lin.nominal_states.col(i + 1);
        ref.segment(i * n, n) = references.col(i);
    }

    // tracking term
    Eigen::VectorXd q_rep = config.q_weights.replicate(N, 1);
    Eigen::MatrixXd QM = q_rep.asDiagonal() * M;
    QpProblem qp;
    qp.H = 2.0 * M.transpose() * QM;
    qp.q = 2.0 * QM.transpose() * (d - ref);

    // increment term: Delta u = D v + delta
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(size, size);
    for (int i = 1; i < N; ++i) D.block(i * m, (i - 1) * m, m, m) = -Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd delta(size);
    delta.segment(0, m) = nominal_inputs.col(0) - prev_input;
    for (int i = 1; i < N; ++i)
        delta.segment(i * m, m) = nominal_inputs.col(i) - nominal_inputs.col(i - 1);
    Eigen::VectorXd r_rep = config.r_weights.replicate(N, 1);
    Eigen::MatrixXd RD = r_rep.asDiagonal() * D;
    qp.H += 2.0 * D.transpose() * RD;
    qp.q += 2.0 * RD.transpose() * delta;

    // soft state boxes: one-sided quadratic where the nominal is at/over a bound
    Eigen::VectorXd p_diag = Eigen::VectorXd::Zero(N * n);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(N * n);
    bool any_soft = false;
    for (int i = 0; i < N; ++i) {
        for (int k = 0; k < n; ++k) {
            const double xv = d[i * n + k];
            if (xv > config.x_max[k]) {
                p_diag[i * n + k] = config.soft_state_weight;
                target[i * n + k] = config.x_max[k];
                any_soft = true;
            } else if (xv < config.x_min[k]) {
                p_diag[i * n + k] = config.soft_state_weight;
                target[i * n + k] = config.x_min[k];
                any_soft = true;
            }
        }
    }
    if (any_soft) {
        Eigen::MatrixXd PM = p_diag.asDiagonal() * M;
        qp.H += 2.0 * M.transpose() * PM;
        qp.q += 2.0 * PM.transpose() * (d - target);
    }
    qp.H = 0.5 * (qp.H + qp.H.transpose());  // kill rounding asymmetry

    // boxes on v: input box, plus the rate-reachable relaxation (exact at stage 0)
    qp.lower.resize(size);
    qp.upper.resize(size);
    Eigen::VectorXd cum = -prev_input;
    for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd ubar = nominal_inputs.col(i);
        Eigen::VectorXd lo = bounds.lower.col(i) - ubar;
        Eigen::VectorXd hi = bounds.upper.col(i) - ubar;
        const double steps = static_cast<double>(i + 1);
        lo = lo.cwiseMax(steps * config.du_min - (ubar + cum));
        hi = hi.cwiseMin(steps * config.du_max - (ubar + cum));
        lo = lo.cwiseMin(hi);  // guard against conflicting boxes
        qp.lower.segment(i * m, m) = lo;
        qp.upper.segment(i * m, m) = hi;
    }

    qp.horizon = N;
    qp.input_dim = m;
    qp.nominal_inputs.resize(size);
    for (int i = 0; i < N; ++i) qp.nominal_inputs.segment(i * m, m) = nominal_inputs.col(i);
    qp.prev_input = prev_input;
    return qp;
}

NmpcStepResult nmpc_step(const DynamicsModel& model, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& references, const Eigen::MatrixXd& warm_inputs,
                         const Eigen::VectorXd& prev_input, const StageBounds& bounds,
                         const NmpcConfig& config) {
    const int n = model.state_dim();
    const int m = model.input_dim();
    config.validate(n, m);
    if (!x0.allFinite()) throw std::invalid_argument("nmpc_step: non-finite state");
    const int N = config.horizon;
    if (references.cols() != N || warm_inputs.cols() != N)
        throw std::invalid_argument("nmpc_step: reference/warm-start horizon mismatch");

    NmpcStepResult result;
    Eigen::MatrixXd nominal = warm_inputs;
    for (int i = 0; i < N; ++i)
        nominal.col(i) = nominal.col(i).cwiseMax(bounds.lower.col(i)).cwiseMin(bounds.upper.col(i));

    for (int it = 0; it < config.sqp_iterations; ++it) {
        LinearizationResult lin = linearize_trajectory(model, x0, nominal);
        QpProblem qp = condense(lin, references, nominal, prev_input, bounds, config);
        AdmmResult sol = admm_solve(qp, nullptr, config.solver);

        result.stats.iterations += sol.iterations;
        result.stats.primal_residual = sol.primal_residual;
        result.stats.dual_residual = sol.dual_residual;
        result.stats.objective = sol.objective;
        result.stats.inexact |= !sol.converged;
        result.stats.extrapolated |= lin.extrapolated;

        for (int i = 0; i < N; ++i) nominal.col(i) += sol.solution.segment(i * m, m);
    }

    result.plan_inputs = nominal;
    result.u_opt = nominal.col(0);
    result.predicted_states.resize(n, N + 1);
    result.predicted_states.col(0) = x0;
    for (int i = 0; i < N; ++i) {
        bool flagged = false;
        result.predicted_states.col(i + 1) =
            model.predict(result.predicted_states.col(i), nominal.col(i), &flagged);
        result.stats.extrapolated |= flagged;
    }
    return result;
}

PinnMpcController::PinnMpcController(const MlpModel& model, const RobotParams& params,
                                     const PayloadEstimate& omega, const GaitSchedule& gait,
                                     const ReferenceGenerator& reference, const NmpcConfig& config,
                                     const PidGains& pid_gains, const ForceBounds& bounds)
    : model_(model),
      params_(params),
      omega_(omega),
      gait_(gait),
      reference_(reference),
      config_(config),
      pid_gains_(pid_gains),
      bounds_(bounds) {
    reset();
}

void PinnMpcController::reset() {
    pid_.reset();
    has_plan_ = false;
    plan_.resize(12, config_.horizon);
    prev_input_ = Eigen::VectorXd::Zero(12);
    stats_ = {};
}

namespace {

/// Gravity-share stance forces for a mask: total supported weight divided
/// over the stance feet (initial warm start before any plan exists).
Eigen::VectorXd weight_share_input(const RobotParams& params, const PayloadEstimate& omega,
                                   const ContactMask& mask) {
    int n_stance = 0;
    for (bool c : mask) n_stance += c ? 1 : 0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(12);
    if (n_stance == 0) return u;
    const double share =
        (params.m + params.leg_mass_sum() + omega.m_p_hat) * params.g / n_stance;
    for (int leg = 0; leg < kNumLegs; ++leg)
        if (mask[static_cast<std::size_t>(leg)]) u[3 * leg + 2] = share;
    return u;
}

}  // namespace

ControlInput PinnMpcController::compute(const ControlContext& ctx) {
    const int N = config_.horizon;
    const double T = config_.T;

    Eigen::MatrixXd refs(12, N);
    for (int i = 0; i < N; ++i)
        refs.col(i) = reference_at(ctx.t + static_cast<double>(i + 1) * T, reference_).to_state();

    StageBounds stage_bounds = StageBounds::contact_aware(bounds_, gait_, ctx.t, T, N);

    if (!has_plan_) {
        for (int i = 0; i < N; ++i) {
            ContactMask mask = gait_mask_at(ctx.t + static_cast<double>(i) * T, gait_);
            plan_.col(i) = weight_share_input(params_, omega_, mask);
        }
        prev_input_ = weight_share_input(params_, omega_, ctx.contact.contact);
        has_plan_ = true;
    } else {
        // shift the previous plan one stage; duplicate the terminal input
        Eigen::MatrixXd shifted(12, N);
        shifted.leftCols(N - 1) = plan_.rightCols(N - 1);
        shifted.col(N - 1) = plan_.col(N - 1);
        plan_ = shifted;
    }

    MlpDynamicsModel surrogate(model_, T, omega_.to_vector());
    NmpcStepResult step =
        nmpc_step(surrogate, ctx.state.to_vector(), refs, plan_, prev_input_, stage_bounds, config_);
    stats_ = step.stats;
    plan_ = step.plan_inputs;
    prev_input_ = step.u_opt;

    ControlInput u_opt = ControlInput::from_vector(step.u_opt, ctx.contact.contact);
    Vec6 wrench = pid_feedback(ctx.state, ctx.reference, pid_gains_, pid_, ctx.dt);
    WrenchDistribution dist = distribute_wrench(wrench, ctx.contact, ctx.state.r);
    return composite_control(u_opt, dist.delta, bounds_);
}

}  // namespace pinnmpc
