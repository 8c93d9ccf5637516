#pragma once

#include "incubation/core.hpp"
#include "incubation/npmle.hpp"
#include "incubation/weights.hpp"

namespace incubation {

// Self-consistency (EM) iteration for the same likelihood. Slow, kept as an
// independent reference for the support reduction solver.

/// p'_j = p_j (1 - d phi / d p_j) = p_j n^{-1} sum_i c_i w_i(j) / d_i.
/// Masses that fall below 1e-15 are frozen at zero.
template <typename Scalar>
Vector<Scalar> em_step(const Vector<Scalar>& p, const WeightMatrix<Scalar>& w)
{
    const Vector<Scalar> g = criterion_gradient(p, w);
    Vector<Scalar> next = p.cwiseProduct(Vector<Scalar>::Ones(p.size()) - g);
    for (Eigen::Index j = 0; j < next.size(); ++j) {
        if (next(j) < Scalar(1e-15)) next(j) = Scalar(0);
    }
    return next / next.sum();
}

struct EmResult {
    MassFunction mass;
    std::vector<double> grid_probs;
    long iterations = 0;
    bool converged = false;
    FenchelResiduals residuals;  // gradient minimum taken over the surviving support
};

/// Runs em_step from the uniform distribution until min_{p_j > 0} d phi/d p_j >= -tol
/// and |<p, grad phi>| <= tol, or max_iter steps.
EmResult fit_em(const WeightMatrix<double>& w, const Grid& grid, double tol, long max_iter);
EmResult fit_em(const Dataset& data, const Grid& grid, double tol, long max_iter,
                DoublyKernel kernel = DoublyKernel::day_average);

} // namespace incubation
