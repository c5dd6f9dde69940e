#pragma once

// Reference projections for validating the Newton-based solvers.  A coarse
// grid over basis coefficients picks a starting point; golden-section
// coordinate descent polishes it until a full sweep moves no coordinate by
// more than 1e-9.  Nothing here shares code with the Newton path: the only
// common ground is the objective definition itself.  Intended for tests;
// rank is capped at 3.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "lqproj/errors.hpp"
#include "lqproj/space.hpp"
#include "lqproj/subspace.hpp"

namespace lqproj {

enum class ProjectionMode { bregman, metric };

struct OracleOptions {
    int grid_points_per_axis = 11;
    double polish_step_tol = 1e-9;
    double line_tol = 1e-12;
    int max_sweeps = 2000;
};

namespace detail {

// Golden-section minimization of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

} // namespace detail

inline PrimalVector brute_force_project_oracle(const PrimalVector& x,
                                               const Subspace& m,
                                               const SpaceConfig& cfg,
                                               ProjectionMode mode,
                                               const OracleOptions& opts = {}) {
    detail::check_dim(x.coords, cfg, "brute_force_project_oracle");
    if (m.rank() > 3)
        throw OracleRankTooHigh("brute_force_project_oracle: rank " +
                                std::to_string(m.rank()) + " exceeds 3");
    int r = m.rank();
    if (r == 0) return PrimalVector(Eigen::VectorXd::Zero(cfg.n));

    const Eigen::MatrixXd qb = m.orthonormal_basis();
    auto objective = [&](const Eigen::VectorXd& c) {
        Eigen::VectorXd y = qb * c;
        if (mode == ProjectionMode::bregman)
            return detail::bregman_raw(y, x.coords, cfg.q, cfg.p);
        return detail::lq_norm(x.coords - y, cfg.q);
    };

    double radius = 2.0 * detail::lq_norm(x.coords, cfg.q);
    if (radius == 0.0) radius = 1.0;

    // Coarse grid over [-radius, radius]^r.
    Eigen::VectorXd best = Eigen::VectorXd::Zero(r);
    double best_val = objective(best);
    int g = std::max(2, opts.grid_points_per_axis);
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(r);
    while (true) {
        Eigen::VectorXd c(r);
        for (int k = 0; k < r; ++k)
            c[k] = -radius + 2.0 * radius * idx[k] / (g - 1);
        double v = objective(c);
        if (v < best_val) {
            best_val = v;
            best = c;
        }
        int k = 0;
        while (k < r && ++idx[k] == g) idx[k++] = 0;
        if (k == r) break;
    }

    // Coordinate descent; each line minimization brackets generously and
    // expands if the minimizer lands on the bracket edge.
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_move = 0.0;
        for (int k = 0; k < r; ++k) {
            double span = radius + 1.0;
            double center = best[k];
            auto line = [&](double t) {
                Eigen::VectorXd c = best;
                c[k] = t;
                return objective(c);
            };
            double t = detail::golden_section(line, center - span, center + span,
                                              opts.line_tol);
            for (int grow = 0; grow < 40 &&
                               std::abs(t - center) > 0.95 * span; ++grow) {
                span *= 4.0;
                t = detail::golden_section(line, center - span, center + span,
                                           opts.line_tol);
            }
            max_move = std::max(max_move, std::abs(t - best[k]));
            best[k] = t;
        }
        if (max_move < opts.polish_step_tol) break;
    }
    return PrimalVector(qb * best);
}

} // namespace lqproj
