#pragma once

// Bregman and metric projections onto subspaces.  Both are computed by
// minimizing over basis coefficients c:
//
//   bregman:  c |-> D_p(Q c, x)        (gauge-p Bregman distance)
//   metric:   c |-> (1/q) ||x - Q c||_q^q
//
// with Q the Euclidean-orthonormal basis of the subspace.  Both objectives
// are smooth (q > 1), strictly convex in c, and coercive, so the damped
// Newton iteration converges globally; least-squares coefficients seed it
// and solve the q = 2 cases in one step.  The metric projection is also
// available through the dual-space route
//
//   P_M x = x - j_{p*}( Pi^{p*}_{ann(M)} (j_p x) ),
//
// which reuses the Bregman machinery in l_{q*}.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lqproj/errors.hpp"
#include "lqproj/newton.hpp"
#include "lqproj/space.hpp"
#include "lqproj/subspace.hpp"

namespace lqproj {

struct ProjectionResult {
    PrimalVector point;
    double objective = 0.0;  // Bregman distance, or l_q distance for metric
    int iterations = 0;
    double residual = 0.0;   // Euclidean norm of the coefficient gradient
    bool converged = false;
};

namespace detail {

// Step lengths at which a tracked coordinate path base + t*delta crosses
// zero.  For q < 2 these are the points where |.|^q loses C^2 smoothness;
// the line search probes them explicitly.
inline std::vector<double> zero_crossings(const Eigen::VectorXd& base,
                                          const Eigen::VectorXd& delta) {
    std::vector<double> ts;
    for (long i = 0; i < base.size(); ++i) {
        if (delta[i] == 0.0) continue;
        double t = -base[i] / delta[i];
        if (t > 0.0 && std::isfinite(t)) ts.push_back(t);
    }
    return ts;
}

struct BregmanObjective {
    const Eigen::MatrixXd& q_basis;
    const Eigen::VectorXd& x;
    double q, p;
    Eigen::VectorXd jx;

    BregmanObjective(const Eigen::MatrixXd& qb, const Eigen::VectorXd& x_,
                     double q_, double p_)
        : q_basis(qb), x(x_), q(q_), p(p_), jx(gauge_gradient(x_, q_, p_)) {}

    double value(const Eigen::VectorXd& c) const {
        Eigen::VectorXd y = q_basis * c;
        double ty = std::pow(lq_norm(y, q), p) / p;
        double tx = std::pow(lq_norm(x, q), p) / p;
        return ty - tx - jx.dot(y - x);
    }
    // The value is a cancellation of terms an order of magnitude larger
    // than itself, so its evaluation noise scales with those terms, not
    // with |value|.  The line search needs this to tell noise from ascent.
    double value_scale(const Eigen::VectorXd& c) const {
        Eigen::VectorXd y = q_basis * c;
        double ty = std::pow(lq_norm(y, q), p) / p;
        double tx = std::pow(lq_norm(x, q), p) / p;
        return ty + tx + jx.cwiseAbs().dot((y - x).cwiseAbs());
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const {
        Eigen::VectorXd y = q_basis * c;
        return q_basis.transpose() * (gauge_gradient(y, q, p) - jx);
    }
    Eigen::MatrixXd hessian(const Eigen::VectorXd& c) const {
        Eigen::VectorXd y = q_basis * c;
        return q_basis.transpose() * gauge_hessian(y, q, p) * q_basis;
    }
    std::vector<double> breakpoints(const Eigen::VectorXd& c,
                                    const Eigen::VectorXd& d) const {
        if (q >= 2.0) return {};
        return zero_crossings(q_basis * c, q_basis * d);
    }
};

struct MetricObjective {
    const Eigen::MatrixXd& q_basis;
    const Eigen::VectorXd& x;
    double q;

    double value(const Eigen::VectorXd& c) const {
        Eigen::VectorXd r = x - q_basis * c;
        double s = 0.0;
        for (long i = 0; i < r.size(); ++i)
            s += std::pow(std::abs(r[i]), q);
        return s / q;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const {
        Eigen::VectorXd r = x - q_basis * c;
        Eigen::VectorXd phi(r.size());
        for (long i = 0; i < r.size(); ++i)
            phi[i] = signed_pow(r[i], q - 1.0);
        return -q_basis.transpose() * phi;
    }
    Eigen::MatrixXd hessian(const Eigen::VectorXd& c) const {
        Eigen::VectorXd r = x - q_basis * c;
        // For q < 2 the curvature |r_i|^{q-2} blows up at a kink.  Clamp it
        // at a scale-relative floor: a coordinate parked exactly on a kink
        // must still see a wall soft enough that a representable step can
        // pull it off when the gradient demands it.
        double floor_ = 1e-10 * (1.0 + x.cwiseAbs().maxCoeff());
        Eigen::VectorXd d(r.size());
        for (long i = 0; i < r.size(); ++i)
            d[i] = (q - 1.0) * std::pow(std::max(std::abs(r[i]), floor_), q - 2.0);
        return q_basis.transpose() * d.asDiagonal() * q_basis;
    }
    std::vector<double> breakpoints(const Eigen::VectorXd& c,
                                    const Eigen::VectorXd& d) const {
        if (q >= 2.0) return {};
        // residual path r - t * (Q d) with r = x - Q c
        return zero_crossings(x - q_basis * c, -(q_basis * d));
    }
};

struct RawProjection {
    Eigen::VectorXd point;
    double objective;
    int iterations;
    double residual;
};

inline RawProjection bregman_project_raw(const Eigen::VectorXd& x,
                                         const Subspace& m, double q, double p,
                                         const SolverOptions& opts) {
    if (x.size() != m.ambient_dim())
        throw DimensionMismatch("bregman_project: dimension mismatch");
    if (m.rank() == 0) {
        double obj = bregman_raw(Eigen::VectorXd::Zero(x.size()), x, q, p);
        return {Eigen::VectorXd::Zero(x.size()), obj, 0, 0.0};
    }
    const Eigen::MatrixXd& qb = m.orthonormal_basis();
    BregmanObjective obj{qb, x, q, p};
    double grad_scale = 1.0 + lq_norm(obj.jx, q / (q - 1.0));
    Eigen::VectorXd c0 = qb.transpose() * x;
    NewtonOutcome res =
        newton_minimize(obj, std::move(c0), opts.tol * grad_scale,
                        stall_residual_factor(q) * grad_scale, opts);
    if (!res.converged)
        throw SolverDivergence("bregman_project: residual " +
                               std::to_string(res.residual) +
                               " above tolerance after max_iter");
    Eigen::VectorXd y = qb * res.c;
    return {y, bregman_raw(y, x, q, p), res.iterations, res.residual};
}

inline RawProjection metric_project_raw(const Eigen::VectorXd& x,
                                        const Subspace& m, double q,
                                        const SolverOptions& opts) {
    if (x.size() != m.ambient_dim())
        throw DimensionMismatch("metric_project: dimension mismatch");
    if (m.rank() == 0)
        return {Eigen::VectorXd::Zero(x.size()), lq_norm(x, q), 0, 0.0};
    const Eigen::MatrixXd& qb = m.orthonormal_basis();
    MetricObjective obj{qb, x, q};
    double grad_scale = 1.0 + std::pow(lq_norm(x, q), q - 1.0);
    Eigen::VectorXd c0 = qb.transpose() * x;
    NewtonOutcome res =
        newton_minimize(obj, std::move(c0), opts.tol * grad_scale,
                        stall_residual_factor(q) * grad_scale, opts);
    if (!res.converged)
        throw SolverDivergence("metric_project: residual " +
                               std::to_string(res.residual) +
                               " above tolerance after max_iter");
    Eigen::VectorXd y = qb * res.c;
    return {y, lq_norm(x - y, q), res.iterations, res.residual};
}

} // namespace detail

// Bregman projection of x onto M for the gauge p of cfg.  The returned
// point y satisfies j_p(y) - j_p(x) _|_ M and ||y||_q <= ||x||_q.
inline ProjectionResult bregman_project(const PrimalVector& x, const Subspace& m,
                                        const SpaceConfig& cfg,
                                        const SolverOptions& opts = {}) {
    detail::check_dim(x.coords, cfg, "bregman_project");
    auto raw = detail::bregman_project_raw(x.coords, m, cfg.q, cfg.p, opts);
    return {PrimalVector(raw.point), raw.objective, raw.iterations,
            raw.residual, true};
}

// D_p(M, x): the Bregman distance from x to the subspace.
inline double bregman_distance_to(const Subspace& m, const PrimalVector& x,
                                  const SpaceConfig& cfg,
                                  const SolverOptions& opts = {}) {
    detail::check_dim(x.coords, cfg, "bregman_distance_to");
    return detail::bregman_project_raw(x.coords, m, cfg.q, cfg.p, opts).objective;
}

// Metric projection onto M in the l_q norm (unique since q > 1).  The
// objective field carries ||x - y||_q.
inline ProjectionResult metric_project_direct(const PrimalVector& x,
                                              const Subspace& m,
                                              const SpaceConfig& cfg,
                                              const SolverOptions& opts = {}) {
    detail::check_dim(x.coords, cfg, "metric_project_direct");
    auto raw = detail::metric_project_raw(x.coords, m, cfg.q, opts);
    return {PrimalVector(raw.point), raw.objective, raw.iterations,
            raw.residual, true};
}

// Metric projection through the dual space: project j_p(x) onto the
// annihilator of M with gauge p*, pull back, and subtract from x.
inline PrimalVector metric_project_via_duality(const PrimalVector& x,
                                               const Subspace& m,
                                               const SpaceConfig& cfg,
                                               const SolverOptions& opts = {}) {
    detail::check_dim(x.coords, cfg, "metric_project_via_duality");
    SpaceConfig dual = cfg.dual();
    Subspace ann = annihilator(m);
    Eigen::VectorXd jx = detail::gauge_gradient(x.coords, cfg.q, cfg.p);
    auto raw = detail::bregman_project_raw(jx, ann, dual.q, dual.p, opts);
    Eigen::VectorXd back = detail::gauge_gradient(raw.point, dual.q, dual.p);
    return PrimalVector(x.coords - back);
}

} // namespace lqproj
