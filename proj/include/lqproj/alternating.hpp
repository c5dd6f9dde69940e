#pragma once

// Iteration drivers: alternating Bregman projections onto a pair of
// subspaces, the alternating residual (metric) method in direct and dual
// form, and the cyclic k-subspace residual variant.  Every driver computes
// its limit up front by one direct projection (onto M cap N, resp. the sum),
// so the recorded per-iterate distances are true errors, not step gaps.
//
// Stopping: a run reports tol_reached only when every step gap
// D_p(x_{n+1}, x_n) in the last full sweep is below tol_step AND the
// iterate is verifiably within 1e-6 of the precomputed limit.  The gap
// condition alone certifies nothing: with contraction factor c per sweep
// a gap of tau still leaves the iterate ~sqrt(tau)/(1-c) away, so the
// driver keeps iterating through sub-threshold gaps until the distance
// check holds.  Iterates that no longer move (gap <= tol_step) are not
// appended to the trace.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "lqproj/errors.hpp"
#include "lqproj/projection.hpp"
#include "lqproj/space.hpp"
#include "lqproj/subspace.hpp"

namespace lqproj {

enum class LimitKind { bregman_projection_of_x0, residual_projection_of_x0 };
enum class StopReason { tol_reached, max_iter_reached, stalled };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::tol_reached: return "tol_reached";
        case StopReason::max_iter_reached: return "max_iter";
        default: return "stalled";
    }
}

// Step-gap threshold (on D_p(x_{n+1}, x_n)) and projection-count budget.
struct StopRule {
    double tol_step = 1e-12;
    int max_iter = 500;
};

struct IterationTrace {
    std::vector<PrimalVector> iterates;     // x_0 first, moving iterates only
    std::vector<double> d_breg_to_limit;    // D_p(limit, x_n)
    std::vector<double> dist_to_limit;      // ||limit - x_n||_q
    PrimalVector limit;
    LimitKind limit_kind = LimitKind::bregman_projection_of_x0;
    StopReason stop_reason = StopReason::tol_reached;
};

struct RateEstimate {
    double q_hat = 0.0;      // fitted per-step contraction factor
    double C_hat = 0.0;
    double r_squared = 0.0;
    int window_begin = 0;    // first index used by the fit
    int window_end = 0;      // one past the last index used
};

namespace detail {

// How close the final iterate must be to the independently computed limit
// for a gap-rule stop to count as genuine convergence.
inline constexpr double kLimitAgreementTol = 1e-6;

inline void append_state(IterationTrace& tr, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& limit, double q, double p) {
    tr.iterates.emplace_back(x);
    tr.d_breg_to_limit.push_back(bregman_raw(limit, x, q, p));
    tr.dist_to_limit.push_back(lq_norm(limit - x, q));
}

// Step gap below which an iterate counts as parked at double resolution:
// a full sweep of such gaps while still far from the limit is a stall,
// not convergence in progress.
inline constexpr double kParkedGap = 1e-28;

// Shared driver: the next iterate is produced from the current one by
// `step(cycle index)`.  Gaps are D_p(next, cur).  A run finishes as
// tol_reached only when a full sweep of gaps is below tol_step AND the
// iterate is within 1e-6 of the precomputed limit — small steps alone
// prove nothing, since a slowly contracting sequence can still be
// sqrt(tol)/(1-c) away from its limit.  Until the distance certificate
// holds the iteration keeps going, so sub-threshold steps may continue;
// only iterates that moved by more than tol_step are recorded.  Throws
// NonConvergence when the budget runs out while steps are still large.
template <class StepFn>
IterationTrace run_alternating(const Eigen::VectorXd& x0,
                               Eigen::VectorXd limit, LimitKind kind,
                               int sweep_len, StepFn&& step,
                               const SpaceConfig& cfg, const StopRule& stop) {
    if (stop.tol_step <= 0.0)
        throw Error("alternating: tol_step must be positive");
    IterationTrace tr;
    tr.limit = PrimalVector(limit);
    tr.limit_kind = kind;
    append_state(tr, x0, limit, cfg.q, cfg.p);

    Eigen::VectorXd cur = x0;
    int calm = 0;    // consecutive gaps <= tol_step
    int parked = 0;  // consecutive gaps at the double-resolution floor
    double last_gap = 0.0;
    bool done = false;
    for (int it = 0; it < stop.max_iter && !done; ++it) {
        Eigen::VectorXd next = step(it % sweep_len, cur);
        last_gap = bregman_raw(next, cur, cfg.q, cfg.p);
        calm = last_gap <= stop.tol_step ? calm + 1 : 0;
        parked = last_gap <= kParkedGap ? parked + 1 : 0;
        if (last_gap > stop.tol_step)
            append_state(tr, next, limit, cfg.q, cfg.p);
        cur = next;
        if (calm >= sweep_len &&
            lq_norm(limit - cur, cfg.q) <= kLimitAgreementTol) {
            tr.stop_reason = StopReason::tol_reached;
            done = true;
        } else if (parked >= sweep_len) {
            tr.stop_reason = StopReason::stalled;
            done = true;
        }
    }
    if (!done) {
        if (last_gap > 1e-6)
            throw NonConvergence("alternating: step gap " +
                                 std::to_string(last_gap) +
                                 " after max_iter projections");
        tr.stop_reason = StopReason::max_iter_reached;
    }
    // The recorded trace must end at the point the run actually reached:
    // the stopping certificate was checked on cur, and a chain of skipped
    // micro steps can leave the last recorded iterate measurably behind.
    if (!(cur.array() == tr.iterates.back().coords.array()).all())
        append_state(tr, cur, limit, cfg.q, cfg.p);
    return tr;
}

} // namespace detail

// Alternating Bregman projections x -> Pi^p_M x -> Pi^p_N (...), converging
// to the Bregman projection of x0 onto M cap N.  The limit is computed
// independently by a direct projection onto the intersection.
inline IterationTrace alternate_bregman(const PrimalVector& x0,
                                        const Subspace& m, const Subspace& n,
                                        const SpaceConfig& cfg,
                                        const StopRule& stop = {},
                                        const SolverOptions& solver = {}) {
    detail::check_dim(x0.coords, cfg, "alternate_bregman");
    // The 1e-9 monotonicity and energy-identity contracts need per-step
    // projection errors around 1e-10, so tighten the default solve.
    SolverOptions tight = solver;
    tight.tol = std::min(tight.tol, 1e-12);
    Subspace meet = intersect(m, n);
    Eigen::VectorXd limit =
        detail::bregman_project_raw(x0.coords, meet, cfg.q, cfg.p, tight).point;
    const Subspace* sets[2] = {&m, &n};
    return detail::run_alternating(
        x0.coords, std::move(limit), LimitKind::bregman_projection_of_x0, 2,
        [&](int k, const Eigen::VectorXd& x) {
            return detail::bregman_project_raw(x, *sets[k], cfg.q, cfg.p, tight)
                .point;
        },
        cfg, stop);
}

enum class ResidualEngine { direct, dual };

// Alternating residual method x -> (I - P_M)x -> (I - P_N)(...), converging
// to (I - P_{M+N}) x0.  engine=direct subtracts metric projections; the
// dual engine runs alternating Bregman projections onto the annihilators in
// the dual space on y_n = j_p(x_n) and maps back through j_{p*}.  When
// dual_iterates is given (dual engine only) the y_n sequence matching the
// recorded iterates is stored there.
inline IterationTrace alternate_residual_metric(
    const PrimalVector& x0, const Subspace& m, const Subspace& n,
    const SpaceConfig& cfg, const StopRule& stop = {},
    ResidualEngine engine = ResidualEngine::direct,
    std::vector<DualVector>* dual_iterates = nullptr,
    const SolverOptions& solver = {}) {
    detail::check_dim(x0.coords, cfg, "alternate_residual_metric");
    SolverOptions tight = solver;
    tight.tol = std::min(tight.tol, 1e-12);
    Subspace join = sum(m, n);
    Eigen::VectorXd limit =
        x0.coords -
        detail::metric_project_raw(x0.coords, join, cfg.q, tight).point;
    const Subspace* sets[2] = {&m, &n};
    if (engine == ResidualEngine::direct) {
        return detail::run_alternating(
            x0.coords, std::move(limit), LimitKind::residual_projection_of_x0,
            2,
            [&](int k, const Eigen::VectorXd& x) -> Eigen::VectorXd {
                return x -
                       detail::metric_project_raw(x, *sets[k], cfg.q, tight)
                           .point;
            },
            cfg, stop);
    }
    // Dual engine: y_{n+1} = Pi^{p*}_{ann} y_n in l_{q*}; x_n = j_{p*}(y_n).
    SpaceConfig dual = cfg.dual();
    Subspace anns[2] = {annihilator(m), annihilator(n)};
    Eigen::VectorXd y = detail::gauge_gradient(x0.coords, cfg.q, cfg.p);
    std::vector<Eigen::VectorXd> ys_all, xs_all;  // every step, pre-filter
    auto tr = detail::run_alternating(
        x0.coords, std::move(limit), LimitKind::residual_projection_of_x0, 2,
        [&](int k, const Eigen::VectorXd&) -> Eigen::VectorXd {
            y = detail::bregman_project_raw(y, anns[k], dual.q, dual.p, tight)
                    .point;
            Eigen::VectorXd back = detail::gauge_gradient(y, dual.q, dual.p);
            if (dual_iterates) {
                ys_all.push_back(y);
                xs_all.push_back(back);
            }
            return back;
        },
        cfg, stop);
    if (dual_iterates) {
        // Keep the y_n that produced each recorded iterate (the recorded
        // iterates are an in-order subsequence of the stepped ones).
        dual_iterates->clear();
        dual_iterates->emplace_back(
            detail::gauge_gradient(x0.coords, cfg.q, cfg.p));
        std::size_t pos = 0;
        for (std::size_t i = 1; i < tr.iterates.size(); ++i) {
            while (pos < xs_all.size() &&
                   !(xs_all[pos].array() == tr.iterates[i].coords.array())
                        .all())
                ++pos;
            if (pos < xs_all.size())
                dual_iterates->emplace_back(ys_all[pos]);
        }
    }
    return tr;
}

// Cyclic residual iteration over k >= 2 subspaces; converges to
// x0 - P_{M_1+...+M_k} x0.  With k = 2 this is exactly the direct-engine
// alternating residual method.
inline IterationTrace alternate_residual_cyclic(
    const PrimalVector& x0, const std::vector<Subspace>& sets,
    const SpaceConfig& cfg, const StopRule& stop = {},
    const SolverOptions& solver = {}) {
    detail::check_dim(x0.coords, cfg, "alternate_residual_cyclic");
    if (sets.size() < 2)
        throw Error("alternate_residual_cyclic: need at least 2 subspaces");
    SolverOptions tight = solver;
    tight.tol = std::min(tight.tol, 1e-12);
    Subspace join = sets[0];
    for (std::size_t i = 1; i < sets.size(); ++i) join = sum(join, sets[i]);
    Eigen::VectorXd limit =
        x0.coords -
        detail::metric_project_raw(x0.coords, join, cfg.q, tight).point;
    return detail::run_alternating(
        x0.coords, std::move(limit), LimitKind::residual_projection_of_x0,
        static_cast<int>(sets.size()),
        [&](int k, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return x -
                   detail::metric_project_raw(x, sets[k], cfg.q, tight).point;
        },
        cfg, stop);
}

// Largest increase of z |-> D_p(z, x_k) over any index pair k >= l, maximized
// over a deterministic sample of points z in C.  Bregman monotone sequences
// keep this non-positive up to rounding.
inline double check_bregman_monotone(const IterationTrace& trace,
                                     const Subspace& c,
                                     const SpaceConfig& cfg) {
    if (trace.iterates.empty())
        throw Error("check_bregman_monotone: empty trace");
    std::vector<Eigen::VectorXd> zs;
    zs.push_back(Eigen::VectorXd::Zero(cfg.n));
    const Eigen::MatrixXd& qb = c.orthonormal_basis();
    for (long j = 0; j < qb.cols(); ++j)
        for (double s : {1.0, -1.0, 0.5, -2.0})
            zs.push_back(s * qb.col(j));
    if (qb.cols() > 1)
        zs.push_back(qb.rowwise().sum());
    double worst = 0.0;
    for (const Eigen::VectorXd& z : zs) {
        double running_min = std::numeric_limits<double>::infinity();
        for (const PrimalVector& x : trace.iterates) {
            double d = detail::bregman_raw(z, x.coords, cfg.q, cfg.p);
            if (d - running_min > worst) worst = d - running_min;
            if (d < running_min) running_min = d;
        }
    }
    return worst;
}

// Least-squares fit of log d_n against n over the admissible window: the
// head transient is dropped (at least 3 entries, and a quarter of the
// above-floor span on long traces, where the pre-asymptotic regime can last
// tens of sweeps before the local geometry settles), as is everything at or
// below the 1e-13 rounding floor.  Fits d_n ~ C_hat * q_hat^n, so q_hat
// measures the asymptotic per-step contraction.
inline RateEstimate estimate_linear_rate(const std::vector<double>& decay) {
    constexpr int kSkipMin = 3;
    constexpr double kFloor = 1e-13;
    int end = static_cast<int>(decay.size());
    while (end > kSkipMin && !(decay[end - 1] > kFloor)) --end;
    int skip = std::max(kSkipMin, end / 4);
    int usable = 0;
    for (int i = skip; i < end; ++i)
        if (decay[i] > kFloor) ++usable;
    if (usable < 5)
        throw InsufficientDecay(
            "estimate_linear_rate: need at least 5 usable decay entries, got " +
            std::to_string(usable));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (int i = skip; i < end; ++i) {
        if (!(decay[i] > kFloor)) continue;
        double lx = static_cast<double>(i), ly = std::log(decay[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        cnt += 1;
    }
    double det = cnt * sxx - sx * sx;
    double slope = (cnt * sxy - sx * sy) / det;
    double intercept = (sy - slope * sx) / cnt;
    double ss_res = 0, ss_tot = 0, mean = sy / cnt;
    for (int i = skip; i < end; ++i) {
        if (!(decay[i] > kFloor)) continue;
        double ly = std::log(decay[i]);
        double fit = intercept + slope * i;
        ss_res += (ly - fit) * (ly - fit);
        ss_tot += (ly - mean) * (ly - mean);
    }
    RateEstimate est;
    est.q_hat = std::exp(slope);
    est.C_hat = std::exp(intercept);
    // A perfectly flat usable window has nothing left to explain.
    est.r_squared = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
    est.window_begin = skip;
    est.window_end = end;
    return est;
}

inline RateEstimate estimate_linear_rate(const IterationTrace& trace) {
    return estimate_linear_rate(trace.d_breg_to_limit);
}

// CSV serialization: iter, d_breg_to_limit, dist_to_limit, norm, step_gap.
// step_gap on row n is D_p(x_n, x_{n-1}); 0 on the first row.
inline void write_trace_csv(std::ostream& os, const IterationTrace& trace,
                            const SpaceConfig& cfg) {
    os << "iter,d_breg_to_limit,dist_to_limit,norm,step_gap\n";
    char buf[512];
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
        double gap =
            i == 0 ? 0.0
                   : detail::bregman_raw(trace.iterates[i].coords,
                                         trace.iterates[i - 1].coords, cfg.q,
                                         cfg.p);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i,
                      trace.d_breg_to_limit[i], trace.dist_to_limit[i],
                      detail::lq_norm(trace.iterates[i].coords, cfg.q), gap);
        os << buf;
    }
}

} // namespace lqproj
