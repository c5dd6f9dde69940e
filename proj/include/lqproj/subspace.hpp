#pragma once

// Linear subspaces of R^n given by explicit bases, with the lattice
// operations needed by the projection algorithms: annihilator (orthogonal
// complement in coordinates), intersection, and sum.  Rank decisions use
// a relative singular-value threshold of 1e-10.

#include <Eigen/Dense>
#include <sstream>
#include <vector>

#include "lqproj/errors.hpp"
#include "lqproj/space.hpp"

namespace lqproj {

inline constexpr double kRankTolerance = 1e-10;

class Subspace {
public:
    // Basis vectors are the columns of `basis`.  Throws DegenerateBasis if
    // they are not linearly independent: after normalizing each column the
    // smallest singular value must exceed 1e-10.  A 0-column matrix is the
    // zero subspace.
    Subspace(int ambient_dim, const Eigen::MatrixXd& basis)
        : ambient_(ambient_dim), basis_(basis) {
        if (ambient_ < 1) throw Error("Subspace: ambient dimension must be >= 1");
        if (basis_.size() == 0) basis_.resize(ambient_, 0);
        if (basis_.rows() != ambient_) {
            std::ostringstream os;
            os << "Subspace: basis vectors have dimension " << basis_.rows()
               << ", ambient space has dimension " << ambient_;
            throw DimensionMismatch(os.str());
        }
        if (basis_.cols() > basis_.rows())
            throw DegenerateBasis("Subspace: more basis vectors than dimensions");
        if (basis_.cols() == 0) {
            orthonormal_.resize(ambient_, 0);
            return;
        }
        Eigen::MatrixXd scaled = basis_;
        for (long j = 0; j < scaled.cols(); ++j) {
            double len = scaled.col(j).norm();
            if (len == 0.0)
                throw DegenerateBasis("Subspace: zero basis vector");
            scaled.col(j) /= len;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
        if (svd.singularValues().minCoeff() <= 1e-10)
            throw DegenerateBasis("Subspace: basis is numerically dependent");
        // Householder QR of a full-column-rank matrix: the leading rank()
        // columns of Q span the same space as the basis.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
        Eigen::MatrixXd q = qr.householderQ();
        orthonormal_ = q.leftCols(basis_.cols());
    }

    static Subspace zero(int ambient_dim) {
        return Subspace(ambient_dim, Eigen::MatrixXd(ambient_dim, 0));
    }

    static Subspace whole(int ambient_dim) {
        return Subspace(ambient_dim,
                        Eigen::MatrixXd::Identity(ambient_dim, ambient_dim));
    }

    // Basis given as rows (one inner list per vector), the layout used by
    // configuration files.
    static Subspace from_rows(int ambient_dim,
                              const std::vector<std::vector<double>>& rows) {
        Eigen::MatrixXd b(ambient_dim, static_cast<long>(rows.size()));
        for (size_t j = 0; j < rows.size(); ++j) {
            if (static_cast<int>(rows[j].size()) != ambient_dim) {
                std::ostringstream os;
                os << "Subspace: basis row " << j << " has length "
                   << rows[j].size() << ", expected " << ambient_dim;
                throw DimensionMismatch(os.str());
            }
            for (int i = 0; i < ambient_dim; ++i) b(i, j) = rows[j][i];
        }
        return Subspace(ambient_dim, b);
    }

    int ambient_dim() const { return ambient_; }
    int rank() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& basis() const { return basis_; }

    // Euclidean-orthonormal basis of the same span (QR of the basis).
    const Eigen::MatrixXd& orthonormal_basis() const { return orthonormal_; }

    // Euclidean residual test: ||x - Q Q^T x||_2 <= tol * (1 + ||x||_2).
    bool contains(const Eigen::VectorXd& x, double tol = kRankTolerance) const {
        if (x.size() != ambient_)
            throw DimensionMismatch("Subspace::contains: dimension mismatch");
        if (rank() == 0) return x.norm() <= tol;
        Eigen::VectorXd r = x - orthonormal_ * (orthonormal_.transpose() * x);
        return r.norm() <= tol * (1.0 + x.norm());
    }

    bool contains(const PrimalVector& x, double tol = kRankTolerance) const {
        return contains(x.coords, tol);
    }

private:
    int ambient_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd orthonormal_;
};

namespace detail {

// Orthonormal basis of the null space of A (n columns), via full SVD.
// Rows of A are constraints; an empty A yields the identity.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, int n) {
    if (a.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = sv.size() > 0 ? sv[0] * kRankTolerance : 0.0;
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

// Orthonormal basis of the column span of A, via thin SVD with the same
// relative rank cutoff.
inline Eigen::MatrixXd range_space(const Eigen::MatrixXd& a) {
    if (a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double cutoff = sv.size() > 0 ? sv[0] * kRankTolerance : 0.0;
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return svd.matrixU().leftCols(rank);
}

} // namespace detail

// Annihilator of M: all functionals vanishing on M, identified with
// coordinate vectors of the dual space through the standard dual basis.
inline Subspace annihilator(const Subspace& m) {
    int n = m.ambient_dim();
    if (m.rank() == 0) return Subspace::whole(n);
    Eigen::MatrixXd constraints = m.orthonormal_basis().transpose();
    Eigen::MatrixXd ns = detail::null_space(constraints, n);
    return Subspace(n, ns);
}

// Intersection as the annihilator of the union of annihilators: null space
// of the stacked constraint rows of ann(M) and ann(N).
inline Subspace intersect(const Subspace& m, const Subspace& n) {
    if (m.ambient_dim() != n.ambient_dim())
        throw DimensionMismatch("intersect: ambient dimensions differ");
    int dim = m.ambient_dim();
    Subspace am = annihilator(m);
    Subspace an = annihilator(n);
    Eigen::MatrixXd constraints(am.rank() + an.rank(), dim);
    constraints.topRows(am.rank()) = am.orthonormal_basis().transpose();
    constraints.bottomRows(an.rank()) = an.orthonormal_basis().transpose();
    return Subspace(dim, detail::null_space(constraints, dim));
}

inline Subspace sum(const Subspace& m, const Subspace& n) {
    if (m.ambient_dim() != n.ambient_dim())
        throw DimensionMismatch("sum: ambient dimensions differ");
    int dim = m.ambient_dim();
    Eigen::MatrixXd joint(dim, m.rank() + n.rank());
    joint.leftCols(m.rank()) = m.basis();
    joint.rightCols(n.rank()) = n.basis();
    return Subspace(dim, detail::range_space(joint));
}

// True if the two subspaces contain each other's basis vectors.
inline bool same_span(const Subspace& a, const Subspace& b, double tol = 1e-8) {
    if (a.ambient_dim() != b.ambient_dim() || a.rank() != b.rank()) return false;
    for (int j = 0; j < b.rank(); ++j)
        if (!a.contains(Eigen::VectorXd(b.orthonormal_basis().col(j)), tol))
            return false;
    for (int j = 0; j < a.rank(); ++j)
        if (!b.contains(Eigen::VectorXd(a.orthonormal_basis().col(j)), tol))
            return false;
    return true;
}

} // namespace lqproj
