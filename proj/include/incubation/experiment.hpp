#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "incubation/npmle.hpp"
#include "incubation/simulate.hpp"

namespace incubation {

enum class IntervalMethod { wald, bootstrap, fisher_averaged };

std::string to_string(IntervalMethod method);
IntervalMethod parse_method(const std::string& text);

struct CoverageConfig {
    TruthSpec truth;
    ExposureSpec exposure;
    Mode mode = Mode::single;
    std::size_t n = 1000;
    int reps = 200;
    std::uint64_t seed = 0;
    IntervalMethod method = IntervalMethod::wald;
    std::vector<int> points{4, 5, 6, 7, 8, 9};
    double level = 0.95;
    int resamples = 300;  // bootstrap B, or Fisher averaging replicates
    SolverConfig solver;
    DoublyKernel kernel = DoublyKernel::day_average;
    unsigned threads = 1;  // replicate-level parallelism
};

struct CoverageRow {
    int day = 0;
    double coverage = 0.0;
    double mean_width = 0.0;
    int failures = 0;
};

// Per-replicate outcome; `ok` is false when the fit or interval failed.
struct CoverageRep {
    bool ok = false;
    std::vector<double> estimate;  // F_n at each point
    std::vector<double> scaled_variance;  // n times the variance behind the interval
    std::vector<double> lower;
    std::vector<double> upper;
};

struct CoverageReport {
    std::vector<int> points;
    std::vector<double> truth;  // true day-averaged CDF at each point
    std::vector<CoverageRow> rows;
    std::vector<CoverageRep> reps;

    std::string to_csv() const;
    // rep,day,estimate,scaled_variance,lower,upper,truth
    std::string replicates_csv() const;
};

// Simulates `reps` datasets, builds intervals and reports per-day coverage of
// the true day-averaged CDF. Replicate r draws its data with seed
// derive_seed(seed, 2r) and resamples with derive_seed(seed, 2r + 1).
CoverageReport coverage_study(const CoverageConfig& config);

struct ComparisonConfig {
    TruthSpec truth = TruthSpec::truncexp();
    ExposureSpec exposure;
    std::size_t n = 500;
    int reps = 200;
    std::uint64_t seed = 0;
    int day = 6;
    SolverConfig solver;
    unsigned threads = 1;
};

// NPMLE against the truncated-exponential fit at one day, per replicate.
struct ComparisonReport {
    int day = 0;
    double truth = 0.0;
    std::vector<double> npmle;
    std::vector<double> parametric;
    int failures = 0;

    // rep,npmle,parametric
    std::string to_csv() const;
};

ComparisonReport comparison_study(const ComparisonConfig& config);

double mean(const std::vector<double>& values);
double sample_variance(const std::vector<double>& values);

} // namespace incubation
