#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "incubation/core.hpp"
#include "incubation/inference.hpp"
#include "incubation/npmle.hpp"

namespace incubation {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`; streams are independent of the
/// order in which they are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

struct BootstrapConfig {
    int b = 1000;
    std::uint64_t seed = 0;
    std::vector<int> points;
    double level = 0.95;
    unsigned threads = 0;  // 0: hardware concurrency
    double max_failure_fraction = 0.10;
};

/// n records drawn uniformly with replacement; a pure function of
/// (data, seed, replicate).
Dataset resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate);

/// Type-7 sample quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double prob);

/// Basic bootstrap intervals [F(t) - Q*_{1-a/2}(t), F(t) - Q*_{a/2}(t)] from the
/// replicate differences F*(t) - F(t), clipped to [0, 1]. Replicates whose fit
/// fails are dropped and counted; more than max_failure_fraction of them is
/// an error.
IntervalTable bootstrap_ci(const Dataset& data, const Grid& grid, const SolverConfig& solver,
                           const BootstrapConfig& config, DoublyKernel kernel = DoublyKernel::day_average);

/// Same, reusing an existing fit of `data` on `grid`.
IntervalTable bootstrap_ci(const Dataset& data, const Grid& grid, const FitResult& fit, const SolverConfig& solver,
                           const BootstrapConfig& config, DoublyKernel kernel = DoublyKernel::day_average);

} // namespace incubation
