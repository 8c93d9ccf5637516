#include "incubation/npmle.hpp"

#include <cstdio>

namespace incubation {

std::string IterationTrace::to_table() const
{
    std::string out = "iter,criterion,min_grad,complementarity,support_size\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.10f,%.10f,%.10f,%d\n", r.iteration, r.criterion, r.min_gradient,
                      r.complementarity, r.support_size);
        out += line;
    }
    return out;
}

FitResult fit_npmle(const WeightMatrix<double>& w, const Grid& grid, double median_day, const SolverConfig& config)
{
    if (static_cast<std::size_t>(w.cols()) != grid.size()) throw InvalidInputError("weight matrix does not match grid");
    const auto start = initial_support_index(w, grid, median_day, config.initial_point);
    auto sol = solve_npmle(w, start, config);

    FitResult fit;
    fit.grid_probs.assign(sol.p.data(), sol.p.data() + sol.p.size());
    fit.mass = MassFunction::on_grid(grid, fit.grid_probs);
    fit.cdf = cdf_from_mass(fit.mass, grid);
    fit.trace = std::move(sol.trace);
    fit.residuals = sol.residuals;
    return fit;
}

FitResult fit_npmle(const Dataset& data, const Grid& grid, const SolverConfig& config, DoublyKernel kernel)
{
    const auto w = build_tallied_weight_matrix<double>(data, grid, kernel);
    return fit_npmle(w, grid, data.median_symptom_day(), config);
}

} // namespace incubation
