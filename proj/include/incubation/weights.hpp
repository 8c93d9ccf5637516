#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "incubation/core.hpp"
#include "incubation/errors.hpp"

namespace incubation {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// 1 if s - e < j <= s, else 0.
template <typename Scalar = double>
constexpr Scalar indicator_weight(int j, int e, int s) noexcept
{
    return (s - e < j && j <= s) ? Scalar(1) : Scalar(0);
}

/// Integration-by-parts kernel of the doubly censored likelihood:
///
///   psi(e, sl, sr, t) = (sr - t) 1{0 < t <= sr} - (sl - t) 1{0 < t <= sl}
///                     - (sr - e - t) 1{0 < t <= sr - e} + (sl - e - t) 1{0 < t <= sl - e}
///
/// For a distribution F with an atom of mass p at t, p * psi is that atom's
/// share of the integral of F(u) - F(u - e) over (sl, sr].
template <typename Scalar = double>
constexpr Scalar psi_weight(int e, int s_l, int s_r, int t) noexcept
{
    auto ramp = [t](int bound) { return (0 < t && t <= bound) ? Scalar(bound - t) : Scalar(0); };
    return ramp(s_r) - ramp(s_l) - ramp(s_r - e) + ramp(s_l - e);
}

/// Weight of the day-averaged mass at `day` (the jump of F-bar at `day`) in
/// sum_{k = sl+1}^{sr} {F-bar(k) - F-bar(k - e)}, the day-discretized form of
/// the integral of F(u) - F(u - e) over (sl, sr]. Equals psi on the window
/// shifted by one day; for sr = sl + 1 it reduces to indicator_weight(day, e, sr).
template <typename Scalar = double>
constexpr Scalar day_psi_weight(int e, int s_l, int s_r, int day) noexcept
{
    return psi_weight<Scalar>(e, s_l + 1, s_r + 1, day);
}

/// How doubly censored records are turned into weights.
enum class DoublyKernel {
    day_average, ///< day_psi_weight: mass at grid day j is F-bar's jump at j
    atom,        ///< psi_weight at t = j: mass at j is an atom of the continuous F
};

/// Sparse per-record likelihood weights with record multiplicities. Row i
/// contributes multiplicity(i) * log(sum_j p_j w_i(j)) to the log likelihood.
template <typename Scalar>
class WeightMatrix {
public:
    using Index = Eigen::Index;

    WeightMatrix() = default;
    explicit WeightMatrix(Index cols) : cols_(cols) { offsets_.push_back(0); }

    /// Appends a row from (column, weight) pairs; zero weights are dropped.
    void add_row(std::span<const Index> columns, std::span<const Scalar> weights, Scalar multiplicity = Scalar(1))
    {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (weights[k] != Scalar(0)) {
                columns_.push_back(columns[k]);
                values_.push_back(weights[k]);
            }
        }
        offsets_.push_back(static_cast<Index>(columns_.size()));
        multiplicity_.push_back(multiplicity);
        total_ += multiplicity;
    }

    Index rows() const noexcept { return static_cast<Index>(multiplicity_.size()); }
    Index cols() const noexcept { return cols_; }
    /// Number of observations, sum of multiplicities.
    Scalar total() const noexcept { return total_; }
    Scalar multiplicity(Index i) const { return multiplicity_[static_cast<std::size_t>(i)]; }

    std::span<const Index> row_columns(Index i) const
    {
        return {columns_.data() + offsets_[i], columns_.data() + offsets_[i + 1]};
    }
    std::span<const Scalar> row_values(Index i) const
    {
        return {values_.data() + offsets_[i], values_.data() + offsets_[i + 1]};
    }

    Scalar weight(Index i, Index j) const
    {
        auto c = row_columns(i);
        auto v = row_values(i);
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] == j) return v[k];
        }
        return Scalar(0);
    }

    /// d_i = sum_j p_j w_i(j) for every row.
    template <typename Derived>
    Vector<Scalar> row_sums(const Eigen::MatrixBase<Derived>& p) const
    {
        Vector<Scalar> d(rows());
        for (Index i = 0; i < rows(); ++i) {
            Scalar acc(0);
            for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += values_[k] * p(columns_[k]);
            d(i) = acc;
        }
        return d;
    }

    /// Dense copy, rows x cols.
    Matrix<Scalar> dense() const
    {
        Matrix<Scalar> out = Matrix<Scalar>::Zero(rows(), cols());
        for (Index i = 0; i < rows(); ++i) {
            for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) out(i, columns_[k]) = values_[k];
        }
        return out;
    }

private:
    Index cols_ = 0;
    std::vector<Index> offsets_;
    std::vector<Index> columns_;
    std::vector<Scalar> values_;
    std::vector<Scalar> multiplicity_;
    Scalar total_ = Scalar(0);
};

namespace detail {

template <typename Scalar, typename Record, typename Kernel>
WeightMatrix<Scalar> build_rows(const std::vector<Record>& records, const std::vector<double>* counts,
                                const Grid& grid, Kernel kernel)
{
    using Index = typename WeightMatrix<Scalar>::Index;
    WeightMatrix<Scalar> w(static_cast<Index>(grid.size()));
    std::vector<Index> cols;
    std::vector<Scalar> vals;
    for (std::size_t i = 0; i < records.size(); ++i) {
        cols.clear();
        vals.clear();
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Scalar v = kernel(records[i], grid[j]);
            if (v > Scalar(0)) {
                cols.push_back(static_cast<Index>(j));
                vals.push_back(v);
            }
        }
        if (cols.empty()) {
            throw InfeasibleError("record " + std::to_string(i) + " has zero likelihood weight on every grid point", i);
        }
        w.add_row(cols, vals, counts ? Scalar((*counts)[i]) : Scalar(1));
    }
    return w;
}

template <typename Scalar>
auto singly_kernel()
{
    return [](const SinglyObs& r, int j) { return indicator_weight<Scalar>(j, r.e, r.s); };
}

template <typename Scalar>
auto doubly_kernel(DoublyKernel kind)
{
    return [kind](const DoublyObs& r, int j) {
        return kind == DoublyKernel::day_average ? day_psi_weight<Scalar>(r.e, r.s_l, r.s_r, j)
                                                 : psi_weight<Scalar>(r.e, r.s_l, r.s_r, j);
    };
}

} // namespace detail

/// One row per record, in dataset order. Throws InfeasibleError naming the
/// first record whose row is all zero.
template <typename Scalar = double>
WeightMatrix<Scalar> build_weight_matrix(const Dataset& data, const Grid& grid,
                                         DoublyKernel kernel = DoublyKernel::day_average)
{
    if (data.mode() == Mode::single) {
        return detail::build_rows<Scalar>(data.singly(), nullptr, grid, detail::singly_kernel<Scalar>());
    }
    return detail::build_rows<Scalar>(data.doubly(), nullptr, grid, detail::doubly_kernel<Scalar>(kernel));
}

/// Identical records merged into one row carrying their count. Same
/// likelihood as build_weight_matrix, far fewer rows for day-resolution data.
template <typename Scalar = double>
WeightMatrix<Scalar> build_tallied_weight_matrix(const Dataset& data, const Grid& grid,
                                                 DoublyKernel kernel = DoublyKernel::day_average)
{
    if (data.mode() == Mode::single) {
        const auto t = tally(data.singly());
        return detail::build_rows<Scalar>(t.records, &t.counts, grid, detail::singly_kernel<Scalar>());
    }
    const auto t = tally(data.doubly());
    return detail::build_rows<Scalar>(t.records, &t.counts, grid, detail::doubly_kernel<Scalar>(kernel));
}

} // namespace incubation
