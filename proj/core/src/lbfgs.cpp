#include "pinnmpc/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace pinnmpc {

namespace {

struct LinePoint {
    double alpha;
    double f;
    double dg;  // directional derivative
};

/// Cubic-interpolation minimizer of the bracket [a, b]; bisection fallback.
double interpolate(const LinePoint& a, const LinePoint& b) {
    const double d1 = a.dg + b.dg - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.dg * b.dg;
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
        const double denom = b.dg - a.dg + 2.0 * d2;
        if (std::abs(denom) > 1e-300) {
            double alpha = b.alpha - (b.alpha - a.alpha) * (b.dg + d2 - d1) / denom;
            const double lo = std::min(a.alpha, b.alpha);
            const double hi = std::max(a.alpha, b.alpha);
            const double guard = 0.1 * (hi - lo);
            if (alpha > lo + guard && alpha < hi - guard) return alpha;
        }
    }
    return 0.5 * (a.alpha + b.alpha);
}

struct Eval1D {
    const LbfgsObjective& objective;
    const Eigen::VectorXd& x0;
    const Eigen::VectorXd& dir;
    Eigen::VectorXd x_buf;
    Eigen::VectorXd g_buf;
    int evals = 0;

    LinePoint at(double alpha) {
        x_buf = x0 + alpha * dir;
        double f = objective(x_buf, g_buf);
        ++evals;
        return {alpha, f, g_buf.dot(dir)};
    }
};

/// Strong-Wolfe line search; returns accepted alpha or 0 on failure.
double strong_wolfe(Eval1D& eval, double f0, double dg0, const LbfgsOptions& opt) {
    const double c1 = opt.c1, c2 = opt.c2;
    LinePoint prev{0.0, f0, dg0};
    double alpha = 1.0;
    LinePoint lo{0, 0, 0}, hi{0, 0, 0};
    bool bracketed = false;

    for (int i = 0; i < opt.max_line_search && !bracketed; ++i) {
        LinePoint cur = eval.at(alpha);
        if (!std::isfinite(cur.f)) {
            alpha *= 0.5;
            continue;
        }
        if (cur.f > f0 + c1 * alpha * dg0 || (i > 0 && cur.f >= prev.f)) {
            lo = prev;
            hi = cur;
            bracketed = true;
            break;
        }
        if (std::abs(cur.dg) <= -c2 * dg0) return cur.alpha;  // strong Wolfe holds
        if (cur.dg >= 0) {
            lo = cur;
            hi = prev;
            bracketed = true;
            break;
        }
        prev = cur;
        alpha *= 2.0;
    }
    if (!bracketed) return 0.0;

    for (int i = 0; i < opt.max_line_search; ++i) {
        double a = interpolate(lo, hi);
        LinePoint cur = eval.at(a);
        if (cur.f > f0 + c1 * a * dg0 || cur.f >= lo.f) {
            hi = cur;
        } else {
            if (std::abs(cur.dg) <= -c2 * dg0) return cur.alpha;
            if (cur.dg * (hi.alpha - lo.alpha) >= 0) hi = lo;
            lo = cur;
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-16) break;
    }
    // fall back to the best sufficient-decrease point found
    return lo.f < f0 ? lo.alpha : 0.0;
}

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, Eigen::VectorXd& x,
                           const LbfgsOptions& options, const LbfgsCallback& callback) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n), x_new(n), g_new(n);
    double f = objective(x, g);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsResult result;
    result.f = f;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= options.grad_tolerance) {
            result.converged = true;
            result.stop_reason = "gradient below tolerance";
            return result;
        }

        // two-loop recursion
        Eigen::VectorXd q = g;
        std::vector<double> alpha_hist(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha_hist[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha_hist[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha_hist[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        double dg0 = g.dot(dir);
        if (!(dg0 < 0)) {  // not a descent direction; reset
            dir = -g;
            dg0 = -g.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        Eval1D eval{objective, x, dir, Eigen::VectorXd(n), Eigen::VectorXd(n), 0};
        double alpha = strong_wolfe(eval, f, dg0, options);
        if (alpha == 0.0) {
            result.stop_reason = "line search failed";
            return result;
        }

        x_new = x + alpha * dir;
        double f_new = objective(x_new, g_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = x_new;
        f = f_new;
        g = g_new;
        result.f = f;
        result.iterations = iter;
        if (callback && !callback(iter, f, x)) {
            result.stop_reason = "stopped by callback";
            return result;
        }
    }
    result.stop_reason = "max iterations";
    return result;
}

}  // namespace pinnmpc
