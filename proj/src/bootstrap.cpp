#include "incubation/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "incubation/parallel.hpp"

namespace incubation {

Dataset resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate)
{
    if (data.empty()) throw InvalidInputError("cannot resample an empty dataset");
    Rng rng(derive_seed(seed, replicate));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    auto draw = [&](const auto& records) {
        std::decay_t<decltype(records)> out;
        out.reserve(records.size());
        for (std::size_t k = 0; k < records.size(); ++k) out.push_back(records[pick(rng)]);
        return Dataset(std::move(out));
    };
    return data.mode() == Mode::single ? draw(data.singly()) : draw(data.doubly());
}

double quantile_type7(std::vector<double> values, double prob)
{
    if (values.empty()) throw InvalidInputError("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidInputError("quantile probability outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IntervalTable bootstrap_ci(const Dataset& data, const Grid& grid, const FitResult& fit, const SolverConfig& solver,
                           const BootstrapConfig& config, DoublyKernel kernel)
{
    if (config.b < 2) throw InvalidInputError("bootstrap needs at least 2 replicates");
    normal_quantile(config.level);

    const auto b = static_cast<std::size_t>(config.b);
    std::vector<std::optional<std::vector<double>>> diffs(b);
    parallel_for(b, config.threads, [&](std::size_t r) {
        const Dataset sample = resample(data, config.seed, r);
        try {
            const auto refit = fit_npmle(sample, grid, solver, kernel);
            std::vector<double> d;
            d.reserve(config.points.size());
            for (int t : config.points) d.push_back(refit.cdf.at(t) - fit.cdf.at(t));
            diffs[r] = std::move(d);
        } catch (const Error&) {
            // dropped below
        }
    });

    IntervalTable table;
    table.method = "bootstrap";
    table.level = config.level;
    for (const auto& d : diffs) {
        if (d) ++table.replicates;
        else ++table.failures;
    }
    if (table.failures > config.max_failure_fraction * static_cast<double>(b) || table.replicates < 2) {
        throw NonConvergenceError("bootstrap: " + std::to_string(table.failures) + " of " + std::to_string(b) +
                                      " replicate fits failed",
                                  {});
    }

    const double tail = (1.0 - config.level) / 2.0;
    for (std::size_t k = 0; k < config.points.size(); ++k) {
        std::vector<double> column;
        column.reserve(b);
        for (const auto& d : diffs) {
            if (d) column.push_back((*d)[k]);
        }
        IntervalRow row;
        row.day = config.points[k];
        row.estimate = fit.cdf.at(row.day);
        row.raw_lower = row.estimate - quantile_type7(column, 1.0 - tail);
        row.raw_upper = row.estimate - quantile_type7(column, tail);
        row.lower = std::clamp(row.raw_lower, 0.0, 1.0);
        row.upper = std::clamp(row.raw_upper, 0.0, 1.0);
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= static_cast<double>(column.size());
        double ss = 0.0;
        for (double v : column) ss += (v - mean) * (v - mean);
        row.variance = ss / static_cast<double>(column.size() - 1);
        table.rows.push_back(row);
    }
    return table;
}

IntervalTable bootstrap_ci(const Dataset& data, const Grid& grid, const SolverConfig& solver,
                           const BootstrapConfig& config, DoublyKernel kernel)
{
    const auto fit = fit_npmle(data, grid, solver, kernel);
    return bootstrap_ci(data, grid, fit, solver, config, kernel);
}

} // namespace incubation
