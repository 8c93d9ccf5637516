#include "incubation/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "incubation/bootstrap.hpp"
#include "incubation/errors.hpp"
#include "incubation/parametric.hpp"
#include "incubation/quadrature.hpp"

namespace incubation {

std::string to_string(Family family)
{
    switch (family) {
    case Family::weibull: return "weibull";
    case Family::truncexp: return "truncexp";
    case Family::custom: return "custom";
    }
    return "custom";
}

Family parse_family(const std::string& text)
{
    if (text == "weibull") return Family::weibull;
    if (text == "truncexp") return Family::truncexp;
    throw InvalidInputError("unknown model '" + text + "' (expected weibull or truncexp)");
}

TruthSpec TruthSpec::weibull(double shape, double rate, int m1)
{
    return {Family::weibull, shape, rate, m1, {}};
}

TruthSpec TruthSpec::truncexp(double scale, int m1)
{
    return {Family::truncexp, scale, 0.0, m1, {}};
}

TruthSpec TruthSpec::custom(std::function<double(double)> cdf, int m1)
{
    return {Family::custom, 0.0, 0.0, m1, std::move(cdf)};
}

void TruthSpec::validate() const
{
    if (m1 < 1) throw InvalidInputError("truncation day m1 must be >= 1");
    switch (family) {
    case Family::weibull:
        if (!(a > 0.0 && b > 0.0)) throw InvalidInputError("Weibull parameters must be positive");
        break;
    case Family::truncexp:
        if (!(a > 0.0)) throw InvalidInputError("exponential scale must be positive");
        break;
    case Family::custom:
        if (!cdf) throw InvalidInputError("custom truth needs a distribution function");
        break;
    }
}

std::vector<double> ExposureSpec::probabilities() const
{
    if (m2 < 1) throw InvalidInputError("maximum exposure m2 must be >= 1");
    if (weights.empty()) return std::vector<double>(static_cast<std::size_t>(m2), 1.0 / m2);
    if (weights.size() != static_cast<std::size_t>(m2)) throw InvalidInputError("exposure weights must cover 1..m2");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }) || !(total > 0.0) ||
        std::abs(total - 1.0) > 1e-9) {
        throw InvalidInputError("exposure weights must be nonnegative and sum to 1");
    }
    return weights;
}

std::string ExposureSpec::validate(int m1) const
{
    probabilities();
    if (2 * m2 <= m1) {
        return "m2 = " + std::to_string(m2) + " does not exceed m1/2 = " + std::to_string(m1 / 2.0) +
               "; day parameters may not be identified";
    }
    return {};
}

double truth_cdf(double x, const TruthSpec& truth)
{
    if (x <= 0.0) return 0.0;
    if (x >= truth.m1) return 1.0;
    switch (truth.family) {
    case Family::weibull:
        return std::expm1(-truth.b * std::pow(x, truth.a)) / std::expm1(-truth.b * std::pow(truth.m1, truth.a));
    case Family::truncexp:
        return trunc_exp_cdf(x, TruncExpParams<double>{truth.a, truth.m1});
    case Family::custom:
        return std::clamp(truth.cdf(x), 0.0, 1.0);
    }
    return 0.0;
}

double true_fbar(const TruthSpec& truth, int day)
{
    if (day <= 0) return 0.0;
    if (day > truth.m1) return 1.0;
    return integrate([&](double x) { return truth_cdf(x, truth); }, day - 1.0, static_cast<double>(day), 1e-12);
}

double inverse_truth_cdf(double u, const TruthSpec& truth)
{
    double lo = 0.0;
    double hi = truth.m1;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (truth_cdf(mid, truth) >= u) hi = mid;
        else lo = mid;
    }
    return hi;
}

SinglyObs singly_record(int e, double infection, double incubation)
{
    const int s = std::max(1, static_cast<int>(std::ceil(infection + incubation)));
    return {std::min(e, s), s};
}

DoublyObs doubly_record(int e, double s, int left_offset, int right_offset)
{
    const int floor_s = static_cast<int>(std::floor(s));
    const int ceil_s = std::max(static_cast<int>(std::ceil(s)), floor_s + 1);
    return {e, std::max(floor_s - left_offset, 0), ceil_s + right_offset};
}

namespace {

struct Draw {
    int e;
    double infection;
    double incubation;
};

template <typename Make>
Dataset draw(std::size_t n, const TruthSpec& truth, const ExposureSpec& exposure, std::uint64_t seed, Make make)
{
    truth.validate();
    const auto probs = exposure.probabilities();
    Rng rng(derive_seed(seed, 0));
    std::discrete_distribution<int> exposure_day(probs.begin(), probs.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    using Record = decltype(make(Draw{}, rng));
    std::vector<Record> records;
    records.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Draw d;
        d.e = exposure_day(rng) + 1;
        d.infection = d.e * unit(rng);
        d.incubation = inverse_truth_cdf(unit(rng), truth);
        records.push_back(make(d, rng));
    }
    return Dataset(std::move(records));
}

} // namespace

Dataset draw_singly(std::size_t n, const TruthSpec& truth, const ExposureSpec& exposure, std::uint64_t seed)
{
    return draw(n, truth, exposure, seed, [](const Draw& d, Rng&) { return singly_record(d.e, d.infection, d.incubation); });
}

Dataset draw_doubly(std::size_t n, const TruthSpec& truth, const ExposureSpec& exposure, std::uint64_t seed)
{
    return draw(n, truth, exposure, seed, [](const Draw& d, Rng& rng) {
        std::uniform_int_distribution<int> offset(0, 3);
        const int right = offset(rng);
        const int left = offset(rng);
        return doubly_record(d.e, d.infection + d.incubation, left, right);
    });
}

} // namespace incubation
