#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "incubation/errors.hpp"

namespace incubation {

// Small dense symmetric positive definite systems: normal equations of the
// support reduction subproblems and observed Fisher matrices. Supports are a
// few dozen points at most, so a plain unblocked Cholesky is enough.

/// Lower Cholesky factor of a symmetric matrix; only the lower triangle is
/// read. A pivot at or below `rel_tol * max|diag|` raises SingularMatrixError
/// carrying the zero-based pivot index.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
cholesky_lower(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-14))
{
    using Scalar = typename Derived::Scalar;
    using Index = Eigen::Index;
    const Index n = m.rows();
    if (m.cols() != n) throw Error("cholesky_lower: matrix is not square");

    Scalar scale(0);
    for (Index k = 0; k < n; ++k) scale = std::max(scale, std::abs(m(k, k)));
    const Scalar floor = rel_tol * scale;

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> l = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        Scalar pivot = m(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > floor) || !std::isfinite(pivot)) {
            throw SingularMatrixError("non-positive pivot at index " + std::to_string(j), static_cast<long>(j));
        }
        const Scalar root = std::sqrt(pivot);
        l(j, j) = root;
        for (Index i = j + 1; i < n; ++i) {
            l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
        }
    }
    return l;
}

/// Solves m x = rhs for symmetric positive definite m.
template <typename DerivedM, typename DerivedB>
Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, DerivedB::ColsAtCompileTime>
spd_solve(const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedB>& rhs)
{
    if (rhs.rows() != m.rows()) throw Error("spd_solve: dimension mismatch");
    const auto l = cholesky_lower(m);
    using Result = Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, DerivedB::ColsAtCompileTime>;
    const Result y = l.template triangularView<Eigen::Lower>().solve(rhs);
    return l.transpose().template triangularView<Eigen::Upper>().solve(y);
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
spd_invert(const Eigen::MatrixBase<Derived>& m)
{
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat inv = spd_solve(m, Mat::Identity(m.rows(), m.cols()));
    return (inv + inv.transpose()) / typename Derived::Scalar(2);
}

} // namespace incubation
