#pragma once

// Finite-dimensional l_q space primitives: the q-norm, the duality map of
// gauge p (gradient of (1/p)||.||_q^p), its inverse through the dual space,
// and the Bregman distance induced by that gauge function.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>

#include "lqproj/errors.hpp"

namespace lqproj {

// Ambient dimension n, norm exponent q > 1, gauge exponent p > 1.
// rho = max(2,q) and sigma = min(2,q) are the convexity and smoothness
// powers of the space; p_star is the conjugate gauge, 1/p + 1/p_star = 1.
struct SpaceConfig {
    int n;
    double q;
    double p;
    double p_star;
    double q_star;
    double rho;
    double sigma;

    SpaceConfig(int n_, double q_, double p_) : n(n_), q(q_), p(p_) {
        if (n < 1) throw Error("SpaceConfig: dimension must be >= 1");
        if (!(q > 1.0) || !(p > 1.0))
            throw Error("SpaceConfig: exponents must satisfy q > 1, p > 1");
        p_star = p / (p - 1.0);
        q_star = q / (q - 1.0);
        rho = std::max(2.0, q);
        sigma = std::min(2.0, q);
    }

    SpaceConfig(int n_, double q_) : SpaceConfig(n_, q_, q_) {}

    // The dual space l_{q*} carries the conjugate gauge p*.
    SpaceConfig dual() const { return SpaceConfig(n, q_star, p_star); }
};

struct PrimalVector {
    Eigen::VectorXd coords;

    PrimalVector() = default;
    explicit PrimalVector(Eigen::VectorXd c) : coords(std::move(c)) {}
    explicit PrimalVector(std::initializer_list<double> v)
        : coords(Eigen::Map<const Eigen::VectorXd>(v.begin(),
                                                   static_cast<long>(v.size()))) {}

    int size() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[i]; }
};

struct DualVector {
    Eigen::VectorXd coords;

    DualVector() = default;
    explicit DualVector(Eigen::VectorXd c) : coords(std::move(c)) {}
    explicit DualVector(std::initializer_list<double> v)
        : coords(Eigen::Map<const Eigen::VectorXd>(v.begin(),
                                                   static_cast<long>(v.size()))) {}

    int size() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[i]; }
};

namespace detail {

inline void check_dim(const Eigen::VectorXd& x, const SpaceConfig& cfg,
                      const char* where) {
    if (x.size() != cfg.n) {
        std::ostringstream os;
        os << where << ": vector has dimension " << x.size()
           << ", space has dimension " << cfg.n;
        throw DimensionMismatch(os.str());
    }
}

// sign(t) * |t|^e with sign handled outside std::pow.
inline double signed_pow(double t, double e) {
    if (t == 0.0) return 0.0;
    double m = std::pow(std::abs(t), e);
    return t > 0.0 ? m : -m;
}

// ||x||_q, scaled by the largest coordinate so intermediate powers stay
// in range and accuracy does not depend on the overall magnitude.
inline double lq_norm(const Eigen::VectorXd& x, double q) {
    double m = x.cwiseAbs().maxCoeff();
    if (x.size() == 0 || m == 0.0) return 0.0;
    double s = 0.0;
    for (long i = 0; i < x.size(); ++i)
        s += std::pow(std::abs(x[i]) / m, q);
    return m * std::pow(s, 1.0 / q);
}

// Gradient of (1/p)||.||_q^p.  Coordinate-wise
//   ||x||^{p-q} |x_i|^{q-1} sign(x_i),
// evaluated as ||x||^{p-1} sign(x_i) (|x_i|/||x||)^{q-1} so every power
// acts on a bounded argument; the map sends 0 to 0.
inline Eigen::VectorXd gauge_gradient(const Eigen::VectorXd& x, double q,
                                      double p) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    double nrm = lq_norm(x, q);
    if (nrm == 0.0) return g;
    double scale = std::pow(nrm, p - 1.0);
    for (long i = 0; i < x.size(); ++i)
        g[i] = scale * signed_pow(x[i] / nrm, q - 1.0);
    return g;
}

// Hessian of (1/p)||.||_q^p at x != 0:
//   ||x||^{p-2} [ (p-q) u u^T + (q-1) diag(w_i^{q-2}) ]
// with u_i = sign(x_i) w_i^{q-1}, w_i = |x_i|/||x||.  For q < 2 the
// diagonal power blows up at w_i = 0; w is clamped at 1e-10 so a
// coordinate parked on a kink still sees a wall soft enough that a
// representable step can pull it off when the gradient demands it.
inline Eigen::MatrixXd gauge_hessian(const Eigen::VectorXd& x, double q,
                                     double p) {
    long n = x.size();
    double nrm = lq_norm(x, q);
    if (nrm == 0.0) return Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd u(n), d(n);
    for (long i = 0; i < n; ++i) {
        double w = std::abs(x[i]) / nrm;
        u[i] = signed_pow(x[i] / nrm, q - 1.0);
        d[i] = std::pow(std::max(w, 1e-10), q - 2.0);
    }
    Eigen::MatrixXd h = (p - q) * (u * u.transpose());
    h.diagonal() += (q - 1.0) * d;
    return std::pow(nrm, p - 2.0) * h;
}

// (1/p)||x||^p - (1/p)||y||^p - <grad_p(y), x - y>.  Exact arithmetic
// gives a nonnegative value; cancellation can leave a tiny negative, which
// is clamped to 0 within a scale-relative slack.  Anything more negative
// is a genuine inconsistency.
inline double bregman_raw(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          double q, double p) {
    double nx = lq_norm(x, q);
    double ny = lq_norm(y, q);
    double tx = std::pow(nx, p) / p;
    double ty = std::pow(ny, p) / p;
    Eigen::VectorXd jy = gauge_gradient(y, q, p);
    double d = tx - ty - jy.dot(x - y);
    if (d < 0.0) {
        double slack = 1e-12 * (1.0 + tx + ty);
        if (d >= -slack) return 0.0;
        std::ostringstream os;
        os << "bregman_distance: value " << d << " below -" << slack;
        throw NumericalError(os.str());
    }
    return d;
}

} // namespace detail

inline double norm(const PrimalVector& x, const SpaceConfig& cfg) {
    detail::check_dim(x.coords, cfg, "norm");
    return detail::lq_norm(x.coords, cfg.q);
}

// Norm of a dual vector, taken in l_{q*}.
inline double dual_norm(const DualVector& f, const SpaceConfig& cfg) {
    detail::check_dim(f.coords, cfg, "dual_norm");
    return detail::lq_norm(f.coords, cfg.q_star);
}

inline DualVector duality_map(const PrimalVector& x, const SpaceConfig& cfg) {
    detail::check_dim(x.coords, cfg, "duality_map");
    return DualVector(detail::gauge_gradient(x.coords, cfg.q, cfg.p));
}

// Inverse of the duality map: the gauge-p* duality map of the dual space,
// so duality_map_inverse(duality_map(x)) == x.
inline PrimalVector duality_map_inverse(const DualVector& f,
                                        const SpaceConfig& cfg) {
    detail::check_dim(f.coords, cfg, "duality_map_inverse");
    return PrimalVector(
        detail::gauge_gradient(f.coords, cfg.q_star, cfg.p_star));
}

inline double bregman_distance(const PrimalVector& x, const PrimalVector& y,
                               const SpaceConfig& cfg) {
    detail::check_dim(x.coords, cfg, "bregman_distance");
    detail::check_dim(y.coords, cfg, "bregman_distance");
    return detail::bregman_raw(x.coords, y.coords, cfg.q, cfg.p);
}

// Defect of the three-point identity
//   D(x,y) = D(x,z) + D(z,y) + <j(z) - j(y), x - z>;
// zero in exact arithmetic for every x, y, z.
inline double three_point_gap(const PrimalVector& x, const PrimalVector& y,
                              const PrimalVector& z, const SpaceConfig& cfg) {
    detail::check_dim(x.coords, cfg, "three_point_gap");
    detail::check_dim(y.coords, cfg, "three_point_gap");
    detail::check_dim(z.coords, cfg, "three_point_gap");
    double dxy = detail::bregman_raw(x.coords, y.coords, cfg.q, cfg.p);
    double dxz = detail::bregman_raw(x.coords, z.coords, cfg.q, cfg.p);
    double dzy = detail::bregman_raw(z.coords, y.coords, cfg.q, cfg.p);
    Eigen::VectorXd jz = detail::gauge_gradient(z.coords, cfg.q, cfg.p);
    Eigen::VectorXd jy = detail::gauge_gradient(y.coords, cfg.q, cfg.p);
    return dxy - dxz - dzy - (jz - jy).dot(x.coords - z.coords);
}

} // namespace lqproj
