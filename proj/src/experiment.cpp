#include "incubation/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "incubation/bootstrap.hpp"
#include "incubation/inference.hpp"
#include "incubation/parallel.hpp"
#include "incubation/parametric.hpp"

namespace incubation {

std::string to_string(IntervalMethod method)
{
    switch (method) {
    case IntervalMethod::wald: return "wald";
    case IntervalMethod::bootstrap: return "bootstrap";
    case IntervalMethod::fisher_averaged: return "wald-averaged";
    }
    return "wald";
}

IntervalMethod parse_method(const std::string& text)
{
    if (text == "wald") return IntervalMethod::wald;
    if (text == "bootstrap") return IntervalMethod::bootstrap;
    if (text == "wald-averaged") return IntervalMethod::fisher_averaged;
    throw InvalidInputError("unknown interval method '" + text + "'");
}

double mean(const std::vector<double>& values)
{
    if (values.empty()) return std::nan("");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values)
{
    if (values.size() < 2) return std::nan("");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size() - 1);
}

namespace {

Dataset simulate(const CoverageConfig& c, std::uint64_t seed)
{
    return c.mode == Mode::single ? draw_singly(c.n, c.truth, c.exposure, seed)
                                  : draw_doubly(c.n, c.truth, c.exposure, seed);
}

std::optional<IntervalTable> intervals(const CoverageConfig& c, const Dataset& data, std::uint64_t resample_seed)
{
    const Grid grid = candidate_grid(data);
    const int length = std::max(grid.back(), c.points.empty() ? 1 : *std::max_element(c.points.begin(), c.points.end()));
    const auto w = build_tallied_weight_matrix<double>(data, grid, c.kernel);
    const auto fit = fit_npmle(w, grid, data.median_symptom_day(), c.solver);
    const double n = static_cast<double>(data.size());
    switch (c.method) {
    case IntervalMethod::wald: {
        const auto fisher = fisher_analysis(w, grid, fit.grid_probs, length);
        auto table = wald_intervals(fit.cdf, fisher.variances, n, c.points, c.level);
        table.pseudo_inverse = fisher.pseudo_inverse;
        return table;
    }
    case IntervalMethod::fisher_averaged: {
        FisherAveraging avg{c.resamples, resample_seed, 1};
        const auto averaged = averaged_observed_fisher(data, grid, fit.grid_probs, c.solver, avg, c.kernel);
        const auto fisher = analyze_fisher(averaged.fisher, fit.mass.support(), length);
        auto table = wald_intervals(fit.cdf, fisher.variances, n, c.points, c.level);
        table.method = "wald-averaged";
        table.pseudo_inverse = fisher.pseudo_inverse;
        return table;
    }
    case IntervalMethod::bootstrap: {
        BootstrapConfig bc;
        bc.b = c.resamples;
        bc.seed = resample_seed;
        bc.points = c.points;
        bc.level = c.level;
        bc.threads = 1;
        return bootstrap_ci(data, grid, fit, c.solver, bc, c.kernel);
    }
    }
    return std::nullopt;
}

} // namespace

CoverageReport coverage_study(const CoverageConfig& config)
{
    if (config.reps < 1) throw InvalidInputError("coverage needs at least one replicate");
    if (config.n < 1) throw InvalidInputError("sample size must be positive");
    if (config.points.empty()) throw InvalidInputError("no interval points requested");
    config.truth.validate();
    normal_quantile(config.level);

    CoverageReport report;
    report.points = config.points;
    for (int t : config.points) report.truth.push_back(true_fbar(config.truth, t));
    report.reps.resize(static_cast<std::size_t>(config.reps));

    const double n = static_cast<double>(config.n);
    parallel_for(report.reps.size(), config.threads, [&](std::size_t r) {
        CoverageRep& rep = report.reps[r];
        try {
            const Dataset data = simulate(config, derive_seed(config.seed, 2 * r));
            const auto table = intervals(config, data, derive_seed(config.seed, 2 * r + 1));
            if (!table) return;
            for (const auto& row : table->rows) {
                rep.estimate.push_back(row.estimate);
                rep.scaled_variance.push_back(row.variance * n);
                rep.lower.push_back(row.lower);
                rep.upper.push_back(row.upper);
            }
            rep.ok = true;
        } catch (const Error&) {
            rep = CoverageRep{};
        }
    });

    for (std::size_t k = 0; k < config.points.size(); ++k) {
        CoverageRow row;
        row.day = config.points[k];
        int hits = 0;
        int used = 0;
        double width = 0.0;
        for (const auto& rep : report.reps) {
            if (!rep.ok) {
                ++row.failures;
                continue;
            }
            ++used;
            width += rep.upper[k] - rep.lower[k];
            if (rep.lower[k] <= report.truth[k] && report.truth[k] <= rep.upper[k]) ++hits;
        }
        row.coverage = used ? static_cast<double>(hits) / used : std::nan("");
        row.mean_width = used ? width / used : std::nan("");
        report.rows.push_back(row);
    }
    return report;
}

std::string CoverageReport::to_csv() const
{
    std::string out = "day,coverage,mean_width,failures\n";
    char line[128];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.6f,%.10f,%d\n", r.day, r.coverage, r.mean_width, r.failures);
        out += line;
    }
    return out;
}

std::string CoverageReport::replicates_csv() const
{
    std::string out = "rep,day,estimate,scaled_variance,lower,upper,truth\n";
    char line[256];
    for (std::size_t r = 0; r < reps.size(); ++r) {
        if (!reps[r].ok) continue;
        for (std::size_t k = 0; k < points.size(); ++k) {
            std::snprintf(line, sizeof line, "%zu,%d,%.10f,%.10e,%.10f,%.10f,%.10f\n", r, points[k],
                          reps[r].estimate[k], reps[r].scaled_variance[k], reps[r].lower[k], reps[r].upper[k],
                          truth[k]);
            out += line;
        }
    }
    return out;
}

ComparisonReport comparison_study(const ComparisonConfig& config)
{
    if (config.reps < 1) throw InvalidInputError("comparison needs at least one replicate");
    config.truth.validate();
    struct Pair {
        double npmle;
        double parametric;
    };
    std::vector<std::optional<Pair>> results(static_cast<std::size_t>(config.reps));
    parallel_for(results.size(), config.threads, [&](std::size_t r) {
        try {
            const Dataset data = draw_singly(config.n, config.truth, config.exposure, derive_seed(config.seed, r));
            const auto fit = fit_npmle(data, candidate_grid(data), config.solver);
            const auto par = fit_trunc_exp(data, config.truth.m1);
            results[r] = Pair{fit.cdf.at(config.day),
                              trunc_exp_day_cdf(config.day, TruncExpParams<double>{par.a, config.truth.m1})};
        } catch (const Error&) {
        }
    });
    ComparisonReport report;
    report.day = config.day;
    report.truth = true_fbar(config.truth, config.day);
    for (const auto& r : results) {
        if (!r) {
            ++report.failures;
            continue;
        }
        report.npmle.push_back(r->npmle);
        report.parametric.push_back(r->parametric);
    }
    return report;
}

std::string ComparisonReport::to_csv() const
{
    std::string out = "rep,npmle,parametric\n";
    char line[128];
    for (std::size_t r = 0; r < npmle.size(); ++r) {
        std::snprintf(line, sizeof line, "%zu,%.10f,%.10f\n", r, npmle[r], parametric[r]);
        out += line;
    }
    return out;
}

} // namespace incubation
