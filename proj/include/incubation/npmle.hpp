#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "incubation/core.hpp"
#include "incubation/errors.hpp"
#include "incubation/linalg.hpp"
#include "incubation/weights.hpp"

namespace incubation {

struct SolverConfig {
    double tol = 1e-10;         // Fenchel tolerance
    int max_outer = 500;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    double inner_tol = 1e-12;   // subproblem gradient tolerance for adding points
    std::optional<int> initial_point;  // day of the one-point start; default nearest the median symptom day

    void validate() const
    {
        if (!(tol > 0.0)) throw InvalidInputError("solver tolerance must be positive");
        if (max_outer < 1) throw InvalidInputError("max_outer must be >= 1");
        if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidInputError("armijo_c must lie in (0, 1)");
        if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) throw InvalidInputError("armijo_shrink must lie in (0, 1)");
        if (!(inner_tol >= 0.0)) throw InvalidInputError("inner_tol must be nonnegative");
    }
};

struct TraceRow {
    int iteration = 0;
    double criterion = 0.0;
    double min_gradient = 0.0;
    double complementarity = 0.0;
    int support_size = 0;
    double step = 1.0;  // accepted Armijo step
};

struct IterationTrace {
    std::vector<TraceRow> rows;

    bool empty() const noexcept { return rows.empty(); }
    std::size_t size() const noexcept { return rows.size(); }
    const TraceRow& back() const { return rows.back(); }
    /// Plain-text table: iter,criterion,min_grad,complementarity,support_size.
    std::string to_table() const;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, IterationTrace trace) : Error(what), trace_(std::move(trace)) {}
    const IterationTrace& trace() const noexcept { return trace_; }
    ExitCode exit_code() const noexcept override { return ExitCode::non_convergence; }

private:
    IterationTrace trace_;
};

struct FenchelResiduals {
    double min_partial = 0.0;
    double complementarity = 0.0;

    bool satisfied(double tol) const noexcept { return min_partial >= -tol && complementarity <= tol; }
};

// ---------------------------------------------------------------------------
// Criterion  phi(p) = -n^{-1} sum_i c_i log(sum_j p_j w_i(j)) + sum_j p_j - 1
// on the cone p >= 0; c_i are row multiplicities and n = sum_i c_i.

/// phi(p), or +infinity where some likelihood term is not positive.
template <typename Scalar, typename Derived>
Scalar criterion_or_inf(const Eigen::MatrixBase<Derived>& p, const WeightMatrix<Scalar>& w) noexcept
{
    const Vector<Scalar> d = w.row_sums(p);
    Scalar loglik(0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (!(d(i) > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
        loglik += w.multiplicity(i) * std::log(d(i));
    }
    return -loglik / w.total() + p.sum() - Scalar(1);
}

template <typename Scalar, typename Derived>
Scalar criterion(const Eigen::MatrixBase<Derived>& p, const WeightMatrix<Scalar>& w)
{
    const Scalar value = criterion_or_inf(p, w);
    if (!std::isfinite(value)) throw InfeasibleError("criterion evaluated where a likelihood term vanishes");
    return value;
}

namespace detail {

template <typename Scalar>
Vector<Scalar> checked_row_sums(const Vector<Scalar>& p, const WeightMatrix<Scalar>& w)
{
    Vector<Scalar> d = w.row_sums(p);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d(i) > Scalar(0))) {
            throw InfeasibleError("likelihood term of row " + std::to_string(i) + " vanishes", static_cast<std::size_t>(i));
        }
    }
    return d;
}

} // namespace detail

/// d phi / d p_j = 1 - n^{-1} sum_i c_i w_i(j) / d_i over every grid point.
template <typename Scalar>
Vector<Scalar> criterion_gradient(const Vector<Scalar>& p, const WeightMatrix<Scalar>& w)
{
    const Vector<Scalar> d = detail::checked_row_sums(p, w);
    Vector<Scalar> acc = Vector<Scalar>::Zero(w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const Scalar scale = w.multiplicity(i) / d(i);
        auto cols = w.row_columns(i);
        auto vals = w.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) acc(cols[k]) += scale * vals[k];
    }
    return Vector<Scalar>::Ones(w.cols()) - acc / w.total();
}

template <typename Scalar>
FenchelResiduals fenchel_residuals(const Vector<Scalar>& p, const WeightMatrix<Scalar>& w)
{
    const Vector<Scalar> g = criterion_gradient(p, w);
    return {static_cast<double>(g.minCoeff()), static_cast<double>(std::abs(p.dot(g)))};
}

// ---------------------------------------------------------------------------
// Quadratic model at p0. With d_i = sum_j p0_j w_i(j),
//   G_jk = n^{-1} sum_i c_i w_i(j) w_i(k) / d_i^2,   b_j = 2 n^{-1} sum_i c_i w_i(j) / d_i - 1,
// and the least squares criterion on a support S is 1/2 x'G_SS x - b_S'x.
// G and b are assembled once over the whole grid; every subproblem of an
// inner pass is a principal submatrix.

template <typename Scalar>
struct QuadraticModel {
    Matrix<Scalar> gram;
    Vector<Scalar> rhs;
};

template <typename Scalar>
QuadraticModel<Scalar> build_quadratic_model(const Vector<Scalar>& p0, const WeightMatrix<Scalar>& w)
{
    const Vector<Scalar> d = detail::checked_row_sums(p0, w);
    const Eigen::Index m = w.cols();
    QuadraticModel<Scalar> model{Matrix<Scalar>::Zero(m, m), Vector<Scalar>::Zero(m)};
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        auto cols = w.row_columns(i);
        auto vals = w.row_values(i);
        const Scalar c = w.multiplicity(i);
        const Scalar inv = Scalar(1) / d(i);
        const Scalar inv2 = c * inv * inv;
        for (std::size_t a = 0; a < cols.size(); ++a) {
            model.rhs(cols[a]) += c * vals[a] * inv;
            for (std::size_t b = 0; b <= a; ++b) model.gram(cols[a], cols[b]) += inv2 * vals[a] * vals[b];
        }
    }
    const Scalar n = w.total();
    model.gram = model.gram.template selfadjointView<Eigen::Lower>();
    model.gram /= n;
    model.rhs = Scalar(2) * model.rhs / n - Vector<Scalar>::Ones(m);
    return model;
}

/// Solves G_SS x = b_S; x may have negative entries. Throws
/// RankDeficientError when G_SS is singular.
template <typename Scalar>
Vector<Scalar> solve_quadratic_subproblem(const std::vector<Eigen::Index>& support, const QuadraticModel<Scalar>& model)
{
    if (support.empty()) throw InvalidInputError("subproblem support is empty");
    const auto k = static_cast<Eigen::Index>(support.size());
    Matrix<Scalar> g(k, k);
    Vector<Scalar> b(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        b(r) = model.rhs(support[r]);
        for (Eigen::Index c = 0; c < k; ++c) g(r, c) = model.gram(support[r], support[c]);
    }
    try {
        return spd_solve(g, b);
    } catch (const SingularMatrixError&) {
        throw RankDeficientError("singular normal equations on the current support",
                                 std::vector<int>(support.begin(), support.end()));
    }
}

/// Same subproblem with the model built from the denominators p0.
template <typename Scalar>
Vector<Scalar> solve_quadratic_subproblem(const std::vector<Eigen::Index>& support, const Vector<Scalar>& p0,
                                          const WeightMatrix<Scalar>& w)
{
    return solve_quadratic_subproblem(support, build_quadratic_model(p0, w));
}

template <typename Scalar>
struct InnerResult {
    std::vector<Eigen::Index> support;  // sorted grid indices with positive mass
    Vector<Scalar> masses;              // full grid, zero off the support
    int additions = 0;
    int removals = 0;
    // Points removed for negativity right after being added; stays zero.
    int removed_just_added = 0;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> scatter(const std::vector<Eigen::Index>& support, const Vector<Scalar>& x, Eigen::Index m)
{
    Vector<Scalar> full = Vector<Scalar>::Zero(m);
    for (std::size_t k = 0; k < support.size(); ++k) full(support[k]) = x(static_cast<Eigen::Index>(k));
    return full;
}

// Removes the most negative (or zero) entry other than `keep` until the
// solution is strictly positive. Returns false if only `keep` is nonpositive.
template <typename Scalar>
bool prune_negative(std::vector<Eigen::Index>& support, Vector<Scalar>& x, const QuadraticModel<Scalar>& model,
                    Eigen::Index keep, int& removals)
{
    while (!support.empty()) {
        Eigen::Index worst = -1;
        bool keep_nonpositive = false;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            if (x(k) > Scalar(0)) continue;
            if (support[k] == keep) {
                keep_nonpositive = true;
                continue;
            }
            if (worst < 0 || x(k) < x(worst)) worst = k;
        }
        if (worst < 0) return !keep_nonpositive;
        support.erase(support.begin() + worst);
        ++removals;
        if (support.empty()) break;
        x = solve_quadratic_subproblem(support, model);
    }
    x.resize(0);
    return true;
}

template <typename Scalar>
Vector<Scalar> gather(const std::vector<Eigen::Index>& support, const Vector<Scalar>& full)
{
    Vector<Scalar> out(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) out(static_cast<Eigen::Index>(k)) = full(support[k]);
    return out;
}

// Moves from the feasible point `from` toward the subproblem solution `x`
// and drops the first coordinate that reaches zero, until the solution on the
// remaining support is strictly positive. Each removal is a descent step for
// the model. Returns false if `keep` would be dropped.
template <typename Scalar>
bool walk_to_positive(std::vector<Eigen::Index>& support, Vector<Scalar>& x, Vector<Scalar> from,
                      const QuadraticModel<Scalar>& model, Eigen::Index keep, int& removals)
{
    while ((x.array() <= Scalar(0)).any()) {
        Eigen::Index hit = -1;
        Scalar t_hit(1);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            if (x(k) > Scalar(0)) continue;
            const Scalar t = from(k) > Scalar(0) ? from(k) / (from(k) - x(k)) : Scalar(0);
            if (hit < 0 || t < t_hit || (t == t_hit && x(k) < x(hit))) {
                hit = k;
                t_hit = t;
            }
        }
        if (support[hit] == keep) return false;
        from += t_hit * (x - from);
        support.erase(support.begin() + hit);
        Vector<Scalar> kept(from.size() - 1);
        kept << from.head(hit), from.tail(from.size() - hit - 1);
        from = std::move(kept);
        ++removals;
        x = solve_quadratic_subproblem(support, model);
    }
    return true;
}

} // namespace detail

/// Minimizes the quadratic model over the cone by support reduction: add the
/// off-support point with the most negative model derivative, re-solve, drop
/// points until all masses are positive, and repeat until no point has a
/// derivative below -inner_tol. The warm-start support is pruned by removing
/// the most negative mass; after an addition, points are dropped in the
/// order they reach zero on the segment from the previous solution.
template <typename Scalar>
InnerResult<Scalar> inner_support_loop(const QuadraticModel<Scalar>& model, std::vector<Eigen::Index> support,
                                       Scalar inner_tol)
{
    const Eigen::Index m = model.rhs.size();
    InnerResult<Scalar> out;

    std::erase_if(support, [&](Eigen::Index j) { return !(model.gram(j, j) > Scalar(0)); });
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    Vector<Scalar> x;
    if (!support.empty()) {
        try {
            x = solve_quadratic_subproblem(support, model);
        } catch (const RankDeficientError&) {
            support.resize(1);
            x = solve_quadratic_subproblem(support, model);
        }
        detail::prune_negative(support, x, model, Eigen::Index(-1), out.removals);
    }
    // At the positive solution G x = b, so the model value is -b'x / 2.
    auto model_value = [&](const std::vector<Eigen::Index>& s, const Vector<Scalar>& v) {
        Scalar acc(0);
        for (std::size_t k = 0; k < s.size(); ++k) acc += model.rhs(s[k]) * v(static_cast<Eigen::Index>(k));
        return -acc / Scalar(2);
    };
    Scalar value = support.empty() ? Scalar(0) : model_value(support, x);

    std::vector<char> excluded(static_cast<std::size_t>(m), 0);
    const int max_steps = 10 * static_cast<int>(m) + 100;
    for (int step = 0; step < max_steps; ++step) {
        const Vector<Scalar> full = detail::scatter(support, x, m);
        const Vector<Scalar> grad = model.gram * full - model.rhs;
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (excluded[j] || !(model.gram(j, j) > Scalar(0))) continue;
            if (std::binary_search(support.begin(), support.end(), j)) continue;
            if (best < 0 || grad(j) < grad(best)) best = j;
        }
        if (best < 0 || grad(best) >= -inner_tol) break;

        std::vector<Eigen::Index> trial = support;
        trial.insert(std::upper_bound(trial.begin(), trial.end(), best), best);
        Vector<Scalar> xt;
        int removals = 0;
        try {
            xt = solve_quadratic_subproblem(trial, model);
            if (!detail::walk_to_positive(trial, xt, detail::gather(trial, full), model, best, removals)) {
                ++out.removed_just_added;
                excluded[best] = 1;
                continue;
            }
        } catch (const RankDeficientError&) {
            // Column dependent on the current support (e.g. a duplicate): it
            // keeps zero mass.
            excluded[best] = 1;
            continue;
        }
        // Near the optimum the exact decrease falls below the rounding of
        // -b'x / 2, so only a visible increase rejects the point.
        const Scalar trial_value = model_value(trial, xt);
        const Scalar noise = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(value));
        if (!(trial_value <= value + noise)) {
            excluded[best] = 1;
            continue;
        }
        support = std::move(trial);
        x = std::move(xt);
        value = trial_value;
        out.removals += removals;
        ++out.additions;
        std::fill(excluded.begin(), excluded.end(), 0);
    }
    if (support.empty()) throw Error("support reduction found no point of positive mass");
    out.masses = detail::scatter(support, x, m);
    out.support = std::move(support);
    return out;
}

template <typename Scalar>
InnerResult<Scalar> inner_support_loop(const Vector<Scalar>& p0, const WeightMatrix<Scalar>& w,
                                       std::vector<Eigen::Index> support, Scalar inner_tol)
{
    return inner_support_loop(build_quadratic_model(p0, w), std::move(support), inner_tol);
}

template <typename Scalar>
struct LineSearchResult {
    Vector<Scalar> p;
    Scalar alpha;
    Scalar criterion;
    Scalar change;  // phi(p) - phi(p0), computed without cancellation
};

/// phi(p0 + alpha dir) - phi(p0) as
///   alpha sum(dir) - n^{-1} sum_i c_i log1p(alpha (W dir)_i / d_i),
/// which stays accurate when the change is far below the rounding of phi.
/// Infinite where a likelihood term would vanish.
template <typename Scalar>
Scalar criterion_change(const Vector<Scalar>& p0, const Vector<Scalar>& dir, const WeightMatrix<Scalar>& w, Scalar alpha)
{
    const Vector<Scalar> d = detail::checked_row_sums(p0, w);
    const Vector<Scalar> wd = w.row_sums(dir);
    Scalar acc(0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const Scalar r = alpha * wd(i) / d(i);
        if (!(r > Scalar(-1))) return std::numeric_limits<Scalar>::infinity();
        acc += w.multiplicity(i) * std::log1p(r);
    }
    return alpha * dir.sum() - acc / w.total();
}

/// Backtracking on the segment from p0 to target: largest alpha in
/// {1, shrink, shrink^2, ...} with
///   phi(p0 + alpha (target - p0)) - phi(p0) <= c alpha <grad phi(p0), target - p0>,
/// with the left side from criterion_change.
template <typename Scalar>
LineSearchResult<Scalar> armijo_search(const Vector<Scalar>& p0, const Vector<Scalar>& target,
                                       const WeightMatrix<Scalar>& w, const SolverConfig& config)
{
    const Scalar phi0 = criterion(p0, w);
    const Vector<Scalar> dir = target - p0;
    if (dir.cwiseAbs().maxCoeff() == Scalar(0)) return {p0, Scalar(1), phi0, Scalar(0)};
    const Vector<Scalar> d = detail::checked_row_sums(p0, w);
    const Vector<Scalar> ratio = w.row_sums(dir).cwiseQuotient(d);
    Scalar slope = dir.sum();
    for (Eigen::Index i = 0; i < w.rows(); ++i) slope -= w.multiplicity(i) * ratio(i) / w.total();

    const auto c = static_cast<Scalar>(config.armijo_c);
    const auto shrink = static_cast<Scalar>(config.armijo_shrink);
    for (Scalar alpha(1); alpha > Scalar(1e-15); alpha *= shrink) {
        const Scalar delta = criterion_change(p0, dir, w, alpha);
        if (delta <= c * alpha * slope) {
            Vector<Scalar> trial = alpha == Scalar(1) ? target : Vector<Scalar>(p0 + alpha * dir);
            return {std::move(trial), alpha, phi0 + delta, delta};
        }
    }
    throw LineSearchError("Armijo line search found no acceptable step");
}

template <typename Scalar>
struct NpmleSolution {
    Vector<Scalar> p;  // masses on the grid
    IterationTrace trace;
    FenchelResiduals residuals;
};

namespace detail {

template <typename Scalar>
int count_positive(const Vector<Scalar>& p)
{
    return static_cast<int>((p.array() > Scalar(0)).count());
}

} // namespace detail

/// Support reduction outer loop. Starts from uniform denominators 1/M with
/// the one-point support {start}, then alternates the inner support loop with
/// an Armijo step until the Fenchel conditions hold within config.tol.
template <typename Scalar>
NpmleSolution<Scalar> solve_npmle(const WeightMatrix<Scalar>& w, Eigen::Index start, const SolverConfig& config)
{
    config.validate();
    const Eigen::Index m = w.cols();
    NpmleSolution<Scalar> sol;
    Vector<Scalar> p = Vector<Scalar>::Constant(m, Scalar(1) / Scalar(m));
    std::vector<Eigen::Index> support{start};
    const auto tol = static_cast<Scalar>(config.inner_tol);
    // Trace values accumulate the accurate per-step changes, so successive
    // rows stay ordered even when the decrease is below the rounding of phi.
    Scalar value = criterion(p, w);

    for (int iter = 1; iter <= config.max_outer; ++iter) {
        const auto model = build_quadratic_model(p, w);
        auto inner = inner_support_loop(model, support, tol);
        LineSearchResult<Scalar> step;
        try {
            step = armijo_search(p, inner.masses, w, config);
        } catch (const LineSearchError&) {
            // No representable decrease left: accept whichever end point is
            // already certified.
            const auto at_target = fenchel_residuals(inner.masses, w);
            const auto at_current = fenchel_residuals(p, w);
            if (at_target.satisfied(config.tol)) {
                const Vector<Scalar> dir = inner.masses - p;
                step = {inner.masses, Scalar(1), Scalar(0), criterion_change(p, dir, w, Scalar(1))};
            } else if (at_current.satisfied(config.tol)) {
                step = {p, Scalar(0), Scalar(0), Scalar(0)};
            } else {
                throw NonConvergenceError("line search failed before the Fenchel conditions were met", sol.trace);
            }
        }
        p = std::move(step.p);
        value += step.change;
        const auto res = fenchel_residuals(p, w);
        sol.trace.rows.push_back({iter, static_cast<double>(value), res.min_partial, res.complementarity,
                                  detail::count_positive(p), static_cast<double>(step.alpha)});
        if (res.satisfied(config.tol)) {
            sol.p = std::move(p);
            sol.residuals = res;
            return sol;
        }
        support = std::move(inner.support);
    }
    throw NonConvergenceError("support reduction did not converge in " + std::to_string(config.max_outer) +
                                  " outer iterations",
                              sol.trace);
}

/// Grid index used for the one-point start: the configured day if given,
/// otherwise the grid point nearest `target` carrying positive weight.
template <typename Scalar>
Eigen::Index initial_support_index(const WeightMatrix<Scalar>& w, const Grid& grid, double target,
                                   const std::optional<int>& day)
{
    if (day) {
        const auto idx = grid.index_of(*day);
        if (!idx) throw InvalidInputError("initial point " + std::to_string(*day) + " is not on the grid");
        return static_cast<Eigen::Index>(*idx);
    }
    std::vector<char> covered(grid.size(), 0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (auto c : w.row_columns(i)) covered[static_cast<std::size_t>(c)] = 1;
    }
    Eigen::Index best = -1;
    double best_dist = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!covered[j]) continue;
        const double dist = std::abs(grid[j] - target);
        if (best < 0 || dist < best_dist) {
            best = static_cast<Eigen::Index>(j);
            best_dist = dist;
        }
    }
    if (best < 0) throw InfeasibleError("no grid point carries likelihood weight");
    return best;
}

// ---------------------------------------------------------------------------
// Dataset-level entry points (double precision).

struct FitResult {
    MassFunction mass;
    DayCdf cdf;
    std::vector<double> grid_probs;  // raw solver masses, aligned with the grid
    IterationTrace trace;
    FenchelResiduals residuals;
};

/// Fits the NPMLE of the day-averaged distribution on `grid`. Identical
/// records are merged before solving.
FitResult fit_npmle(const Dataset& data, const Grid& grid, const SolverConfig& config = {},
                    DoublyKernel kernel = DoublyKernel::day_average);

/// Same, with a prebuilt weight matrix (rows may carry multiplicities).
FitResult fit_npmle(const WeightMatrix<double>& w, const Grid& grid, double median_day, const SolverConfig& config = {});

} // namespace incubation
