#include "incubation/parametric.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace incubation {

double trunc_exp_loglik(double a, const Dataset& data, int m1)
{
    const TruncExpParams<double> params{a, m1};
    params.validate();
    const auto t = tally(data.singly());
    double total = 0.0;
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const double band = day_band_integral(t.records[i].s, t.records[i].e, params);
        if (!(band > 0.0)) return -std::numeric_limits<double>::infinity();
        total += t.counts[i] * std::log(band);
    }
    return total;
}

TruncExpFit fit_trunc_exp(const Dataset& data, int m1, std::pair<double, double> bracket)
{
    auto [lower, upper] = bracket;
    if (!(lower > 0.0 && upper > lower)) throw InvalidInputError("invalid bracket for the exponential scale");
    auto f = [&](double a) { return trunc_exp_loglik(a, data, m1); };

    constexpr int scan = 50;
    std::vector<double> grid(scan);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    const double log_lo = std::log(lower);
    const double log_step = (std::log(upper) - log_lo) / (scan - 1);
    for (int k = 0; k < scan; ++k) {
        grid[k] = k == scan - 1 ? upper : std::exp(log_lo + log_step * k);
        const double v = f(grid[k]);
        if (v > best_value) {
            best_value = v;
            best = static_cast<std::size_t>(k);
        }
    }

    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[best + 1 == grid.size() ? best : best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }

    TruncExpFit fit;
    const std::array<double, 3> candidates{0.5 * (lo + hi), grid[best], best == 0 ? lower : upper};
    fit.a = candidates[0];
    fit.loglik = f(fit.a);
    for (double c : candidates) {
        const double v = f(c);
        if (v > fit.loglik) {
            fit.a = c;
            fit.loglik = v;
        }
    }
    fit.at_bracket_edge = fit.a - lower <= 1e-6 || upper - fit.a <= 1e-6;
    return fit;
}

} // namespace incubation
