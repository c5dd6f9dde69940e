#pragma once

// Damped Newton minimizer for the small smooth convex problems behind the
// projection operations.  The step solves (H + floor*I) d = -g; if that
// direction fails the descent test the iteration falls back to -g.  A
// backtracking line search with an Armijo condition guards every step; the
// Armijo comparison carries an epsilon-scale slack so the full Newton step
// is still accepted once objective decrements fall below the resolution of
// double arithmetic.
//
// For q < 2 the gradient of the objective is only Hoelder continuous, and
// at a minimizer whose residual vanishes the gradient norm bottoms out
// near sqrt(eps) regardless of how exact the iterate is (|r|^{q-1} with
// |r| at machine epsilon).  The iteration therefore also terminates when
// the iterate is pinned at the floating-point floor, and such a stall
// counts as convergence as long as the gradient is below a sqrt(eps)-scale
// threshold.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace lqproj {

// Shared knobs for the projection solvers.
struct SolverOptions {
    double tol = 1e-11;           // first-order residual target (scaled by caller)
    int max_iter = 200;
    double backtrack_factor = 0.5;
    double sufficient_decrease = 1e-4;
    double hessian_floor = 1e-12; // ridge added to keep steps well defined
};

namespace detail {

struct NewtonOutcome {
    Eigen::VectorXd c;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Gradient-norm threshold below which a floating-point-floor stall still
// counts as convergence, as a multiple of the caller's gradient scale.
// For q < 2 a residual coordinate resting on a kink leaves a gradient
// contribution of order eps^{q-1} that no double-precision iterate can
// remove, so the threshold widens accordingly; the cap keeps the solver
// honest as q -> 1, where the floor exceeds anything worth certifying
// and the solve reports divergence instead.
inline double stall_residual_factor(double q) {
    double floor_ = q < 2.0 ? 8.0 * std::pow(2.2e-16, q - 1.0) : 0.0;
    return std::clamp(std::max(floor_, 1e-7), 1e-7, 3e-3);
}

// F must provide value(c), gradient(c), hessian(c).  grad_tol is the
// primary stopping threshold on ||g||; stall_tol the secondary one used
// when the iterate can no longer move in double precision.
template <class F>
NewtonOutcome newton_minimize(F&& f, Eigen::VectorXd c0, double grad_tol,
                              double stall_tol, const SolverOptions& opts) {
    NewtonOutcome out;
    out.c = std::move(c0);
    long r = out.c.size();
    if (r == 0) {
        out.converged = true;
        return out;
    }
    double fc = f.value(out.c);
    int pinned_streak = 0;
    int frozen_streak = 0;
    double frozen_mark = std::numeric_limits<double>::infinity();
    bool stalled = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd g = f.gradient(out.c);
        out.residual = g.norm();
        // The objective hits its representability floor (df ~ eps*|f|) while
        // the gradient is still shrinking quadratically, so a frozen f alone
        // is not a stall.  Only count frozen steps while the residual has
        // stopped gaining ground on its last mark; floor jitter never
        // sustains 10% gains, genuine convergence always does.
        if (out.residual < 0.9 * frozen_mark) {
            frozen_mark = out.residual;
            frozen_streak = 0;
        }
        if (out.residual <= grad_tol) {
            out.converged = true;
            return out;
        }
        Eigen::MatrixXd h = f.hessian(out.c);
        h.diagonal().array() += opts.hessian_floor;
        Eigen::VectorXd d = h.ldlt().solve(-g);
        double gd = g.dot(d);
        // Relative descent test: fall back to -g only when d is numerically
        // orthogonal to the gradient. An absolute floor here would misread the
        // genuine Newton direction once |g| ~ 1e-7 (gd ~ -|g|^2).
        if (!d.allFinite() || gd >= -1e-12 * d.norm() * out.residual) {
            d = -g;
            gd = -g.squaredNorm();
        }
        // Evaluation noise of f: defaults to eps-relative in |f|, but an
        // objective assembled by cancellation of larger terms reports the
        // magnitude of those terms instead.
        double fscale = std::abs(fc);
        if constexpr (requires { f.value_scale(out.c); })
            fscale = f.value_scale(out.c);
        double t = 1.0;
        double t_acc = -1.0; // accepted step length, if any
        double f_acc = fc;
        for (int ls = 0; ls < 80; ++ls) {
            double fcand = f.value(out.c + t * d);
            double slack = 8.0 * 2.2e-16 * (fscale + std::abs(fcand));
            if (fcand <= fc + opts.sufficient_decrease * t * gd + slack) {
                t_acc = t;
                f_acc = fcand;
                break;
            }
            t *= opts.backtrack_factor;
        }
        // Kink-aware candidates: where |.|^q with q < 2 loses C^2 smoothness
        // (a residual coordinate crossing zero) the Newton step reflects
        // across the crossing by the factor 1/(q-1) instead of settling on
        // it, and the backtracking sequence never lands there.  Objectives
        // with such kinks expose the crossing step lengths; probing them
        // restores genuine descent.
        if constexpr (requires { f.breakpoints(out.c, d); }) {
            for (double tb : f.breakpoints(out.c, d)) {
                if (!(tb > 1e-12 && tb <= 1.0)) continue;
                double fb = f.value(out.c + tb * d);
                if (fb < f_acc) {
                    t_acc = tb;
                    f_acc = fb;
                }
            }
        }
        bool stepped = t_acc > 0.0;
        if (stepped) {
            Eigen::VectorXd cand = out.c + t_acc * d;
            double moved = (cand - out.c).cwiseAbs().maxCoeff();
            double pin = 8.0 * 2.2e-16 * (1.0 + out.c.cwiseAbs().maxCoeff());
            pinned_streak = moved <= pin ? pinned_streak + 1 : 0;
            // Steps that no longer change the objective at double
            // resolution mean the iterate is as good as this arithmetic
            // allows, even if the iterate itself still jitters.
            double df = std::abs(fc - f_acc);
            frozen_streak = df <= 8.0 * 2.2e-16 * fscale ? frozen_streak + 1 : 0;
            out.c = std::move(cand);
            fc = f_acc;
            out.iterations = it + 1;
        }
        if (!stepped || pinned_streak >= 2 || frozen_streak >= 6) {
            stalled = true;
            break;
        }
    }
    Eigen::VectorXd g = f.gradient(out.c);
    out.residual = g.norm();
    out.converged =
        out.residual <= (stalled ? std::max(grad_tol, stall_tol) : grad_tol);
    return out;
}

} // namespace detail
} // namespace lqproj
