#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "incubation/npmle.hpp"
#include "incubation/simulate.hpp"

using namespace incubation;

namespace {

double weibull_cdf(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 15.0) return 1.0;
    return (1.0 - std::exp(-0.0026 * std::pow(x, 3.035))) / (1.0 - std::exp(-0.0026 * std::pow(15.0, 3.035)));
}

double truncexp_fbar_by_quadrature(int day)
{
    auto f = [](double x) { return (1.0 - std::exp(-x / 6.0)) / (1.0 - std::exp(-2.5)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, day - 1.0, static_cast<double>(day), 15,
                                                                         1e-14);
}

} // namespace

TEST_CASE("truth distribution functions")
{
    const auto weibull = TruthSpec::weibull();
    CHECK(truth_cdf(0.0, weibull) == 0.0);
    CHECK(truth_cdf(15.0, weibull) == 1.0);
    CHECK(truth_cdf(6.0, weibull) == doctest::Approx(0.450).epsilon(1e-3));
    CHECK(truth_cdf(6.0, weibull) == doctest::Approx(weibull_cdf(6.0)).epsilon(1e-14));

    const auto texp = TruthSpec::truncexp(6.0, 15);
    CHECK(truth_cdf(6.0, texp) == doctest::Approx(0.6886).epsilon(1e-4));

    CHECK(parse_family("weibull") == Family::weibull);
    CHECK(to_string(Family::truncexp) == "truncexp");
    CHECK_THROWS_AS(parse_family("gamma"), InvalidInputError);
    CHECK_THROWS_AS(TruthSpec::weibull(-1.0).validate(), InvalidInputError);
}

TEST_CASE("day-averaged truth")
{
    const auto uniform = TruthSpec::custom([](double x) { return x / 15.0; }, 15);
    for (int i = 1; i <= 15; ++i) CHECK(true_fbar(uniform, i) == doctest::Approx((i - 0.5) / 15.0).epsilon(1e-12));
    CHECK(true_fbar(uniform, 16) == 1.0);

    const auto texp = TruthSpec::truncexp(6.0, 15);
    CHECK(std::abs(true_fbar(texp, 6) - truncexp_fbar_by_quadrature(6)) <= 1e-10);
    CHECK(true_fbar(texp, 6) == doctest::Approx(0.6533147351).epsilon(1e-9));
}

TEST_CASE("exposure specification")
{
    CHECK(ExposureSpec::uniform(4).probabilities() == std::vector<double>(4, 0.25));
    CHECK(ExposureSpec::uniform(15).validate(15).empty());
    CHECK_FALSE(ExposureSpec::uniform(7).validate(15).empty());
    CHECK_THROWS_AS(ExposureSpec({2, {0.4, 0.4}}).probabilities(), InvalidInputError);
    CHECK_THROWS_AS(ExposureSpec({2, {0.5}}).probabilities(), InvalidInputError);
    CHECK_THROWS_AS(ExposureSpec::uniform(0).probabilities(), InvalidInputError);
}

TEST_CASE("inversion sampling passes a Kolmogorov-Smirnov check")
{
    const auto truth = TruthSpec::weibull();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = inverse_truth_cdf(unit(rng), truth);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int k = 0; k < n; ++k) {
        const double f = weibull_cdf(xs[static_cast<std::size_t>(k)]);
        ks = std::max({ks, std::abs(f - static_cast<double>(k) / n), std::abs(static_cast<double>(k + 1) / n - f)});
    }
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("record construction")
{
    CHECK(singly_record(5, 0.4, 2.3) == SinglyObs{3, 3});
    CHECK(singly_record(2, 0.4, 2.3) == SinglyObs{2, 3});
    CHECK(singly_record(5, 0.5, 0.7) == SinglyObs{2, 2});
    CHECK(doubly_record(4, 5.3, 0, 0) == DoublyObs{4, 5, 6});
    CHECK(doubly_record(4, 5.3, 3, 3) == DoublyObs{4, 2, 9});
    for (int left = 0; left <= 3; ++left) CHECK(doubly_record(1, 0.4, left, 0).s_l == 0);
    CHECK(doubly_record(1, 5.0, 0, 0) == DoublyObs{1, 5, 6});
}

TEST_CASE("window offsets are uniform")
{
    // A point mass at 10 and one-day exposure pin floor(S) = 10 and ceil(S) = 11.
    const auto truth = TruthSpec::custom([](double x) { return x >= 10.0 ? 1.0 : 0.0; }, 15);
    constexpr std::size_t n = 100000;
    const Dataset data = draw_doubly(n, truth, ExposureSpec::uniform(1), 4);
    std::array<int, 4> right{};
    std::array<int, 4> left{};
    for (const auto& r : data.doubly()) {
        REQUIRE(r.s_r - 11 >= 0);
        REQUIRE(r.s_r - 11 <= 3);
        REQUIRE(10 - r.s_l >= 0);
        REQUIRE(10 - r.s_l <= 3);
        ++right[static_cast<std::size_t>(r.s_r - 11)];
        ++left[static_cast<std::size_t>(10 - r.s_l)];
    }
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    for (std::size_t d = 0; d < 4; ++d) {
        CHECK(std::abs(right[d] / static_cast<double>(n) - 0.25) <= 3 * sigma);
        CHECK(std::abs(left[d] / static_cast<double>(n) - 0.25) <= 3 * sigma);
    }
}

TEST_CASE("one-day exposure recovers the day-averaged truth empirically")
{
    // With E = 1, P(S <= i) = integral of F over [i - 1, i].
    const auto truth = TruthSpec::truncexp(6.0, 15);
    constexpr std::size_t n = 100000;
    const Dataset data = draw_singly(n, truth, ExposureSpec::uniform(1), 6);
    const auto hits = std::count_if(data.singly().begin(), data.singly().end(), [](const SinglyObs& r) { return r.s <= 6; });
    CHECK(std::abs(static_cast<double>(hits) / n - 0.6533147351) <= 0.01);
}

TEST_CASE("draws are determined by the seed")
{
    const auto truth = TruthSpec::weibull();
    CHECK(draw_singly(500, truth, ExposureSpec::uniform(), 9) == draw_singly(500, truth, ExposureSpec::uniform(), 9));
    CHECK_FALSE(draw_singly(500, truth, ExposureSpec::uniform(), 9) ==
                draw_singly(500, truth, ExposureSpec::uniform(), 10));
    CHECK(draw_doubly(500, truth, ExposureSpec::uniform(), 9) == draw_doubly(500, truth, ExposureSpec::uniform(), 9));
    const Dataset data = draw_singly(500, truth, ExposureSpec::uniform(), 9);
    CHECK(validate_dataset(data) == data);
    const Dataset doubly = draw_doubly(500, truth, ExposureSpec::uniform(), 9);
    CHECK(validate_dataset(doubly) == doubly);
}

TEST_CASE("NPMLE on a large singly sample is close to the truth")
{
    const auto truth = TruthSpec::weibull();
    const Dataset data = draw_singly(10000, truth, ExposureSpec::uniform(), 2024);
    const auto fit = fit_npmle(data, candidate_grid(data, 15));
    double gap = 0.0;
    for (int i = 1; i <= 15; ++i) gap = std::max(gap, std::abs(fit.cdf.at(i) - true_fbar(truth, i)));
    CHECK(gap <= 0.03);
}
