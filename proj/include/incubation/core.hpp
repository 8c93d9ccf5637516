#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace incubation {

// Singly interval censored record: exposure window [0, e], symptom day s
// (ceiling of the continuous symptom time).
struct SinglyObs {
    int e = 1;
    int s = 1;
    friend bool operator==(const SinglyObs&, const SinglyObs&) = default;
    friend auto operator<=>(const SinglyObs&, const SinglyObs&) = default;
};

// Doubly interval censored record: exposure window [0, e], symptom time known
// to lie in (s_l, s_r].
struct DoublyObs {
    int e = 1;
    int s_l = 0;
    int s_r = 1;
    friend bool operator==(const DoublyObs&, const DoublyObs&) = default;
    friend auto operator<=>(const DoublyObs&, const DoublyObs&) = default;
};

enum class Mode { single, dual };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<SinglyObs> records) : records_(std::move(records)) {}
    explicit Dataset(std::vector<DoublyObs> records) : records_(std::move(records)) {}

    Mode mode() const noexcept { return records_.index() == 0 ? Mode::single : Mode::dual; }
    std::size_t size() const noexcept;
    bool empty() const noexcept { return size() == 0; }

    const std::vector<SinglyObs>& singly() const;
    const std::vector<DoublyObs>& doubly() const;

    // Largest s (singly) or s_r (doubly).
    int max_symptom_day() const;
    int max_exposure() const;
    // Median of s (singly) or of the window midpoints (doubly).
    double median_symptom_day() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::variant<std::vector<SinglyObs>, std::vector<DoublyObs>> records_;
};

// Candidate support points for the estimator.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<int> points);
    static Grid range(int first, int last);

    const std::vector<int>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    int front() const { return points_.front(); }
    int back() const { return points_.back(); }
    int operator[](std::size_t k) const { return points_[k]; }
    // Position of `day` in the grid, if present.
    std::optional<std::size_t> index_of(int day) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::vector<int> points_;
};

// Discrete distribution on integer days. Zero masses are pruned on
// construction and the remainder renormalized when its sum drifts from one by
// more than 1e-12.
class MassFunction {
public:
    MassFunction() = default;
    MassFunction(std::vector<int> support, std::vector<double> probs);
    // From a mass vector aligned with the grid points.
    static MassFunction on_grid(const Grid& grid, const std::vector<double>& probs);

    const std::vector<int>& support() const noexcept { return support_; }
    const std::vector<double>& probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return support_.size(); }
    double mass_at(int day) const;

private:
    std::vector<int> support_;
    std::vector<double> probs_;
};

// values[i - 1] = F(i), i = 1..M.
struct DayCdf {
    std::vector<double> values;

    // F(day); zero for day < 1, one past the end.
    double at(int day) const;
    int last_day() const noexcept { return static_cast<int>(values.size()); }
};

// Checks ranges and normalizes records. Singly records with s < e get e := s,
// which leaves the likelihood interval (0, s]. Doubly records with s_l < 0 are
// clipped to s_l = 0. Throws InvalidInputError naming the offending record.
Dataset validate_dataset(const Dataset& raw);

DayCdf cdf_from_mass(const MassFunction& mass, const Grid& grid);

// {1, ..., max s} (or max s_r); with m1, {1, ..., max(m1 + max e, max s)}.
Grid candidate_grid(const Dataset& data, std::optional<int> m1 = std::nullopt);

// Distinct records (in order of first appearance) with their multiplicities.
template <typename Record>
struct Tally {
    std::vector<Record> records;
    std::vector<double> counts;
};

Tally<SinglyObs> tally(const std::vector<SinglyObs>& records);
Tally<DoublyObs> tally(const std::vector<DoublyObs>& records);

} // namespace incubation
