#include "incubation/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include <Eigen/Eigenvalues>

#include "incubation/bootstrap.hpp"
#include "incubation/parallel.hpp"

namespace incubation {

std::vector<double> extend_variances(const std::vector<double>& diag, const std::vector<int>& support_days, int length)
{
    if (support_days.size() != diag.size() + 1) {
        throw InvalidInputError("extend_variances: need one more support day than variances");
    }
    if (!std::is_sorted(support_days.begin(), support_days.end())) {
        throw InvalidInputError("extend_variances: support days must be sorted");
    }
    std::vector<double> out(static_cast<std::size_t>(std::max(length, 0)), 0.0);
    for (std::size_t j = 0; j < diag.size(); ++j) {
        for (int k = support_days[j]; k < support_days[j + 1] && k <= length; ++k) {
            if (k >= 1) out[static_cast<std::size_t>(k - 1)] = diag[j];
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (values(k) > cutoff) inv(k) = 1.0 / values(k);
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<Eigen::Index> positive_indices(const std::vector<double>& probs)
{
    std::vector<Eigen::Index> out;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (probs[j] > 0.0) out.push_back(static_cast<Eigen::Index>(j));
    }
    return out;
}

} // namespace

FisherResult analyze_fisher(Eigen::MatrixXd fisher, std::vector<int> support_days, int length)
{
    FisherResult out;
    out.support = std::move(support_days);
    out.fisher = std::move(fisher);
    if (out.fisher.rows() + 1 != static_cast<Eigen::Index>(out.support.size())) {
        throw InvalidInputError("Fisher matrix order does not match the support");
    }
    if (out.fisher.rows() == 0) {
        out.variances.assign(static_cast<std::size_t>(std::max(length, 0)), 0.0);
        return out;
    }
    try {
        out.inverse = spd_invert(out.fisher);
    } catch (const SingularMatrixError&) {
        out.inverse = pseudo_inverse(out.fisher);
        out.pseudo_inverse = true;
    }
    out.cdf_cov = cdf_covariance_from_inverse(out.inverse);
    std::vector<double> diag(static_cast<std::size_t>(out.cdf_cov.rows()));
    for (Eigen::Index k = 0; k < out.cdf_cov.rows(); ++k) diag[static_cast<std::size_t>(k)] = std::max(out.cdf_cov(k, k), 0.0);
    out.variances = extend_variances(diag, out.support, length);
    return out;
}

FisherResult fisher_analysis(const WeightMatrix<double>& w, const Grid& grid, const std::vector<double>& grid_probs,
                             int length)
{
    const auto support = positive_indices(grid_probs);
    std::vector<int> days;
    for (auto j : support) days.push_back(grid[static_cast<std::size_t>(j)]);
    if (support.size() < 2) return analyze_fisher(Eigen::MatrixXd(0, 0), std::move(days), length);
    const Eigen::Map<const Eigen::VectorXd> p(grid_probs.data(), static_cast<Eigen::Index>(grid_probs.size()));
    return analyze_fisher(observed_fisher<double>(w, p, support), std::move(days), length);
}

AveragedFisher averaged_observed_fisher(const Dataset& data, const Grid& grid, const std::vector<double>& grid_probs,
                                        const SolverConfig& solver, const FisherAveraging& averaging,
                                        DoublyKernel kernel)
{
    if (averaging.replicates < 1) throw InvalidInputError("Fisher averaging needs at least one replicate");
    const auto support = positive_indices(grid_probs);
    if (support.size() < 2) throw DegenerateFitError("observed Fisher information needs at least two support points");

    const auto b = static_cast<std::size_t>(averaging.replicates);
    std::vector<std::optional<Eigen::MatrixXd>> mats(b);
    parallel_for(b, averaging.threads, [&](std::size_t r) {
        const Dataset sample = resample(data, averaging.seed, r);
        try {
            const auto w = build_tallied_weight_matrix<double>(sample, grid, kernel);
            const auto refit = fit_npmle(w, grid, sample.median_symptom_day(), solver);
            const Eigen::Map<const Eigen::VectorXd> p(refit.grid_probs.data(),
                                                      static_cast<Eigen::Index>(refit.grid_probs.size()));
            mats[r] = observed_fisher<double>(w, p, support);
        } catch (const Error&) {
        }
    });

    AveragedFisher out;
    const auto dim = static_cast<Eigen::Index>(support.size() - 1);
    out.fisher = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& m : mats) {
        if (!m) {
            ++out.skipped;
            continue;
        }
        out.fisher += *m;
        ++out.used;
    }
    if (out.used == 0) throw DegenerateFitError("every Fisher averaging replicate failed");
    out.fisher /= static_cast<double>(out.used);
    return out;
}

double normal_quantile(double level)
{
    if (std::abs(level - 0.90) < 1e-9) return 1.645;
    if (std::abs(level - 0.95) < 1e-9) return 1.96;
    if (std::abs(level - 0.99) < 1e-9) return 2.576;
    throw InvalidInputError("confidence level must be one of 0.90, 0.95, 0.99");
}

IntervalTable wald_intervals(const DayCdf& cdf, const std::vector<double>& variances, double n,
                             const std::vector<int>& points, double level)
{
    if (!(n > 0.0)) throw InvalidInputError("sample size must be positive");
    const double z = normal_quantile(level);
    IntervalTable table;
    table.method = "wald";
    table.level = level;
    for (int t : points) {
        if (t < 1 || static_cast<std::size_t>(t) > variances.size()) {
            throw InvalidInputError("interval day " + std::to_string(t) + " outside the variance range");
        }
        IntervalRow row;
        row.day = t;
        row.estimate = cdf.at(t);
        const double var = std::max(variances[static_cast<std::size_t>(t - 1)], 0.0);
        const double half = z * std::sqrt(var) / std::sqrt(n);
        row.raw_lower = row.estimate - half;
        row.raw_upper = row.estimate + half;
        row.lower = std::clamp(row.raw_lower, 0.0, 1.0);
        row.upper = std::clamp(row.raw_upper, 0.0, 1.0);
        row.variance = var / n;
        table.rows.push_back(row);
    }
    return table;
}

std::string IntervalTable::to_csv() const
{
    std::string out = "day,estimate,lower,upper,method,variance\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.10f,%.10f,%.10f,%s,%.10e\n", r.day, r.estimate, r.lower, r.upper,
                      method.c_str(), r.variance);
        out += line;
    }
    return out;
}

} // namespace incubation
