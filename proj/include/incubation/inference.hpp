#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "incubation/core.hpp"
#include "incubation/errors.hpp"
#include "incubation/linalg.hpp"
#include "incubation/npmle.hpp"
#include "incubation/weights.hpp"

namespace incubation {

/// Observed Fisher information of the masses at the support points
/// i_1 < ... < i_l (grid indices), with the last point m = i_l eliminated by
/// the sum-to-one constraint:
///
///   f_jk = n^{-1} sum_i c_i (w_i(j) - w_i(m)) (w_i(k) - w_i(m)) / d_i^2,
///   d_i  = sum_t p_t w_i(t),
///
/// for j, k in i_1..i_{l-1}. Indicator weights give the singly censored
/// matrix, psi weights the doubly censored one.
template <typename Scalar>
Matrix<Scalar> observed_fisher(const WeightMatrix<Scalar>& w, const Vector<Scalar>& p,
                               const std::vector<Eigen::Index>& support)
{
    if (support.size() < 2) throw DegenerateFitError("observed Fisher information needs at least two support points");
    const auto dim = static_cast<Eigen::Index>(support.size() - 1);
    const Eigen::Index last = support.back();
    const Vector<Scalar> d = w.row_sums(p);
    Matrix<Scalar> f = Matrix<Scalar>::Zero(dim, dim);
    Vector<Scalar> score(dim);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (!(d(i) > Scalar(0))) {
            throw DegenerateFitError("fitted likelihood term of row " + std::to_string(i) + " is zero");
        }
        const Scalar wm = w.weight(i, last);
        for (Eigen::Index k = 0; k < dim; ++k) score(k) = w.weight(i, support[k]) - wm;
        f.noalias() += (w.multiplicity(i) / (d(i) * d(i))) * score * score.transpose();
    }
    return f / w.total();
}

/// A V A^T for a mass covariance V.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
cdf_covariance_from_inverse(const Eigen::MatrixBase<Derived>& inverse)
{
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat a = Mat::Ones(inverse.rows(), inverse.cols()).template triangularView<Eigen::Lower>();
    Mat cov = a * inverse * a.transpose();
    return (cov + cov.transpose()) / typename Derived::Scalar(2);
}

/// A F^{-1} A^T with A lower-triangular ones: the covariance of the partial
/// sums (CDF values) implied by the mass covariance F^{-1}. Throws
/// SingularMatrixError when F is not positive definite.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
cdf_covariance(const Eigen::MatrixBase<Derived>& fisher)
{
    try {
        return cdf_covariance_from_inverse(spd_invert(fisher));
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("observed Fisher matrix is singular (") + e.what() +
                                      "); use bootstrap intervals instead",
                                  e.pivot());
    }
}

/// Step extension of the CDF variances to days 1..length: zero before the
/// first support day, diag_j on [i_j, i_{j+1}), zero from the last support
/// day on. `support_days` has one more entry than `diag`.
std::vector<double> extend_variances(const std::vector<double>& diag, const std::vector<int>& support_days, int length);

struct FisherResult {
    std::vector<int> support;      // support days i_1..i_l
    Eigen::MatrixXd fisher;        // (l-1) x (l-1)
    Eigen::MatrixXd inverse;
    Eigen::MatrixXd cdf_cov;
    std::vector<double> variances; // D_1..D_length
    bool pseudo_inverse = false;   // Fisher matrix was singular
};

/// Inverts a Fisher matrix and extends the CDF variances. A singular matrix
/// falls back to the Moore-Penrose pseudo-inverse and sets pseudo_inverse.
FisherResult analyze_fisher(Eigen::MatrixXd fisher, std::vector<int> support_days, int length);

/// Observed Fisher analysis of a fitted NPMLE on its own support.
FisherResult fisher_analysis(const WeightMatrix<double>& w, const Grid& grid, const std::vector<double>& grid_probs,
                             int length);

struct FisherAveraging {
    int replicates = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct AveragedFisher {
    Eigen::MatrixXd fisher;
    int used = 0;
    int skipped = 0;  // replicates whose refit failed or was degenerate
};

/// Mean of observed Fisher matrices over bootstrap resamples. Every replicate
/// is refitted on `grid`; its matrix is formed on the support of the original
/// fit (`grid_probs` > 0) with the replicate's own records and fitted
/// denominators. Summation runs in replicate order.
AveragedFisher averaged_observed_fisher(const Dataset& data, const Grid& grid, const std::vector<double>& grid_probs,
                                        const SolverConfig& solver, const FisherAveraging& averaging,
                                        DoublyKernel kernel = DoublyKernel::day_average);

struct IntervalRow {
    int day = 0;
    double estimate = 0.0;
    double lower = 0.0;      // clipped to [0, 1]
    double upper = 0.0;
    double raw_lower = 0.0;  // before clipping
    double raw_upper = 0.0;
    double variance = 0.0;   // estimated variance of the estimate itself
};

struct IntervalTable {
    std::string method;
    double level = 0.95;
    std::vector<IntervalRow> rows;
    int replicates = 0;  // bootstrap replicates used
    int failures = 0;    // dropped bootstrap replicates
    bool pseudo_inverse = false;

    /// CSV with header day,estimate,lower,upper,method,variance.
    std::string to_csv() const;
};

/// Two-sided normal quantile for the supported levels 0.90, 0.95, 0.99.
double normal_quantile(double level);

/// [F(t) - z sigma(t) / sqrt(n), F(t) + z sigma(t) / sqrt(n)], clipped to
/// [0, 1], where sigma(t)^2 = variances[t - 1].
IntervalTable wald_intervals(const DayCdf& cdf, const std::vector<double>& variances, double n,
                             const std::vector<int>& points, double level = 0.95);

} // namespace incubation
