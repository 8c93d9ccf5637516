#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "incubation/core.hpp"

namespace incubation {

enum class Family { weibull, truncexp, custom };

std::string to_string(Family family);
Family parse_family(const std::string& text);

// Incubation-time law, truncated at m1 days.
//   weibull:  (1 - exp(-b x^a)) / (1 - exp(-b m1^a)) on [0, m1]
//   truncexp: (1 - exp(-x/a)) / (1 - exp(-m1/a))     on [0, m1]
//   custom:   `cdf`, clamped to 0 below 0 and 1 above m1
struct TruthSpec {
    Family family = Family::weibull;
    double a = 3.035;
    double b = 0.0026;
    int m1 = 15;
    std::function<double(double)> cdf;

    static TruthSpec weibull(double shape = 3.035, double rate = 0.0026, int m1 = 15);
    static TruthSpec truncexp(double scale = 6.0, int m1 = 15);
    static TruthSpec custom(std::function<double(double)> cdf, int m1);

    void validate() const;
};

// Exposure length distribution on {1, ..., m2}.
struct ExposureSpec {
    int m2 = 15;
    std::vector<double> weights;  // empty: uniform

    static ExposureSpec uniform(int m2 = 15) { return {m2, {}}; }
    std::vector<double> probabilities() const;
    /// Throws on invalid weights; returns a warning when m2 <= m1/2, where the
    /// day parameters are not identified.
    std::string validate(int m1) const;
};

double truth_cdf(double x, const TruthSpec& truth);

/// Integral of truth_cdf over [i - 1, i] (absolute tolerance 1e-10).
double true_fbar(const TruthSpec& truth, int day);

/// Smallest x in [0, m1] with truth_cdf(x) >= u, by bisection to 1e-12.
double inverse_truth_cdf(double u, const TruthSpec& truth);

/// (e, ceil(infection + incubation)), normalized as validate_dataset does.
SinglyObs singly_record(int e, double infection, double incubation);

/// Window around a continuous symptom time s: s_r = ceil(s) + right_offset,
/// s_l = max(floor(s) - left_offset, 0), offsets in {0, ..., 3}.
DoublyObs doubly_record(int e, double s, int left_offset, int right_offset);

Dataset draw_singly(std::size_t n, const TruthSpec& truth, const ExposureSpec& exposure, std::uint64_t seed);
Dataset draw_doubly(std::size_t n, const TruthSpec& truth, const ExposureSpec& exposure, std::uint64_t seed);

} // namespace incubation
