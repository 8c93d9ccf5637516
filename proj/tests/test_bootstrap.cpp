#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "incubation/bootstrap.hpp"
#include "incubation/simulate.hpp"

using namespace incubation;

TEST_CASE("seed derivation is order free and spreads indices")
{
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("type-7 quantiles")
{
    CHECK(quantile_type7({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_type7({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == doctest::Approx(2.0));
    CHECK(quantile_type7({1.0, 2.0}, 0.975) == doctest::Approx(1.975));
    CHECK(quantile_type7({7.0}, 0.1) == 7.0);
    CHECK(quantile_type7({1.0, 9.0}, 0.0) == 1.0);
    CHECK(quantile_type7({1.0, 9.0}, 1.0) == 9.0);
    CHECK_THROWS_AS(quantile_type7({}, 0.5), InvalidInputError);
    CHECK_THROWS_AS(quantile_type7({1.0}, 1.5), InvalidInputError);
}

TEST_CASE("resampling")
{
    SUBCASE("one record repeats")
    {
        const Dataset data(std::vector<SinglyObs>{{3, 7}});
        CHECK(resample(data, 4, 9) == data);
    }
    SUBCASE("deterministic per replicate")
    {
        const Dataset data = draw_doubly(50, TruthSpec::weibull(), ExposureSpec::uniform(), 1);
        CHECK(resample(data, 5, 3) == resample(data, 5, 3));
        CHECK_FALSE(resample(data, 5, 3) == resample(data, 5, 4));
        CHECK(resample(data, 5, 3).size() == 50);
    }
    SUBCASE("two records are drawn evenly")
    {
        const Dataset data(std::vector<SinglyObs>{{1, 1}, {1, 2}});
        int first = 0;
        constexpr int reps = 5000;
        for (int r = 0; r < reps; ++r) {
            const Dataset sample = resample(data, 11, static_cast<std::uint64_t>(r));
            for (const auto& rec : sample.singly()) first += rec.s == 1;
        }
        const double draws = 2.0 * reps;
        CHECK(std::abs(first / draws - 0.5) <= 3.0 * std::sqrt(0.25 / draws));
    }
    SUBCASE("empty data is rejected")
    {
        CHECK_THROWS_AS(resample(Dataset(std::vector<SinglyObs>{}), 1, 0), InvalidInputError);
    }
}

TEST_CASE("single record gives degenerate intervals")
{
    const Dataset data(std::vector<SinglyObs>{{2, 4}});
    const Grid grid = candidate_grid(data);
    BootstrapConfig config;
    config.b = 20;
    config.seed = 1;
    config.points = {1, 2, 3, 4};
    const auto fit = fit_npmle(data, grid);
    const auto table = bootstrap_ci(data, grid, fit, {}, config);
    for (const auto& row : table.rows) {
        CHECK(row.lower == row.estimate);
        CHECK(row.upper == row.estimate);
    }
    CHECK(table.failures == 0);
    CHECK(table.replicates == 20);
}

TEST_CASE("bootstrap intervals")
{
    const Dataset data = draw_singly(300, TruthSpec::weibull(), ExposureSpec::uniform(), 12);
    const Grid grid = candidate_grid(data);
    BootstrapConfig config;
    config.b = 60;
    config.seed = 77;
    config.points = {3, 4, 5, 6, 7, 8, 9, 10};
    config.threads = 1;
    const auto serial = bootstrap_ci(data, grid, {}, config);

    SUBCASE("independent of thread count")
    {
        config.threads = 3;
        const auto parallel = bootstrap_ci(data, grid, {}, config);
        CHECK(serial.to_csv() == parallel.to_csv());
    }
    SUBCASE("contain the estimate exactly when zero lies between the quantiles")
    {
        const auto fit = fit_npmle(data, grid);
        for (const auto& row : serial.rows) {
            CHECK(row.estimate == fit.cdf.at(row.day));
            const bool zero_inside = row.raw_lower <= row.estimate && row.estimate <= row.raw_upper;
            CHECK(zero_inside == (row.lower <= row.estimate && row.estimate <= row.upper));
            CHECK(row.lower >= 0.0);
            CHECK(row.upper <= 1.0);
        }
        CHECK(serial.method == "bootstrap");
        CHECK(serial.replicates + serial.failures == 60);
    }
    SUBCASE("rejects tiny replicate counts")
    {
        config.b = 1;
        CHECK_THROWS_AS(bootstrap_ci(data, grid, {}, config), InvalidInputError);
    }
}
