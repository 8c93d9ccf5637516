#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "incubation/core.hpp"
#include "incubation/errors.hpp"

namespace incubation {

// Truncated exponential incubation law
//   F_a(x) = (1 - exp(-x/a)) / (1 - exp(-m1/a)) on [0, m1], 0 below, 1 above.
template <typename Scalar = double>
struct TruncExpParams {
    Scalar a = Scalar(1);
    int m1 = 1;

    void validate() const
    {
        if (!(a > Scalar(0))) throw InvalidInputError("truncated exponential scale must be positive");
        if (m1 < 1) throw InvalidInputError("truncation bound must be >= 1");
    }
    Scalar normalizer() const { return -std::expm1(-Scalar(m1) / a); }
};

template <typename Scalar>
Scalar trunc_exp_cdf(Scalar x, const TruncExpParams<Scalar>& params)
{
    if (x < Scalar(0)) return Scalar(0);
    if (x > Scalar(params.m1)) return Scalar(1);
    return -std::expm1(-x / params.a) / params.normalizer();
}

namespace detail {

// a exp(-k/a) (exp(1/a) - 1), written as a exp(-(k-1)/a) (1 - exp(-1/a))
// so that it does not overflow for small a.
template <typename Scalar>
Scalar exp_day_tail(int k, Scalar a)
{
    return -a * std::exp(-Scalar(k - 1) / a) * std::expm1(-Scalar(1) / a);
}

} // namespace detail

/// Integral of F_a over [k - 1, k] for integer k:
/// [1 - a exp(-k/a)(exp(1/a) - 1)] / (1 - exp(-m1/a)) inside the truncation
/// range, 0 for k <= 0 and 1 for k > m1.
template <typename Scalar>
Scalar trunc_exp_day_cdf(int k, const TruncExpParams<Scalar>& params)
{
    if (k <= 0) return Scalar(0);
    if (k > params.m1) return Scalar(1);
    return (Scalar(1) - detail::exp_day_tail(k, params.a)) / params.normalizer();
}

/// Integral of F_a(s) - F_a(s - e) over [k - 1, k]. Differences of two day
/// integrals inside the truncation range are formed from their tails so the
/// value stays accurate when both are close to one.
template <typename Scalar>
Scalar day_band_integral(int k, int e, const TruncExpParams<Scalar>& params)
{
    const int lo = k - e;
    if (lo <= 0) return trunc_exp_day_cdf(k, params);
    if (lo > params.m1) return Scalar(0);
    // 1 - day integral at j, for 1 <= j <= m1.
    auto complement = [&](int j) {
        return (detail::exp_day_tail(j, params.a) - std::exp(-Scalar(params.m1) / params.a)) / params.normalizer();
    };
    if (k > params.m1) return complement(lo);
    return (detail::exp_day_tail(lo, params.a) - detail::exp_day_tail(k, params.a)) / params.normalizer();
}

/// sum_i log day_band_integral(s_i, e_i); -infinity when a term vanishes.
double trunc_exp_loglik(double a, const Dataset& data, int m1);

struct TruncExpFit {
    double a = 0.0;
    double loglik = 0.0;
    bool at_bracket_edge = false;
};

/// Maximizes trunc_exp_loglik over a in [lower, upper]: 50-point log-spaced
/// scan, then golden-section refinement around the best scan point to an
/// absolute tolerance of 1e-8.
TruncExpFit fit_trunc_exp(const Dataset& data, int m1, std::pair<double, double> bracket = {0.01, 100.0});

} // namespace incubation
