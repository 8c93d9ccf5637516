#include "incubation/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "incubation/errors.hpp"

namespace incubation {

std::string to_string(Mode mode)
{
    return mode == Mode::single ? "single" : "double";
}

Mode parse_mode(const std::string& text)
{
    if (text == "single") return Mode::single;
    if (text == "double") return Mode::dual;
    throw InvalidInputError("unknown mode '" + text + "' (expected single or double)");
}

std::size_t Dataset::size() const noexcept
{
    return std::visit([](const auto& v) { return v.size(); }, records_);
}

const std::vector<SinglyObs>& Dataset::singly() const
{
    if (mode() != Mode::single) throw Error("dataset is doubly censored");
    return std::get<0>(records_);
}

const std::vector<DoublyObs>& Dataset::doubly() const
{
    if (mode() != Mode::dual) throw Error("dataset is singly censored");
    return std::get<1>(records_);
}

int Dataset::max_symptom_day() const
{
    int best = 0;
    if (mode() == Mode::single) {
        for (const auto& r : singly()) best = std::max(best, r.s);
    } else {
        for (const auto& r : doubly()) best = std::max(best, r.s_r);
    }
    return best;
}

int Dataset::max_exposure() const
{
    int best = 0;
    std::visit([&](const auto& v) {
        for (const auto& r : v) best = std::max(best, r.e);
    }, records_);
    return best;
}

double Dataset::median_symptom_day() const
{
    std::vector<double> s;
    s.reserve(size());
    if (mode() == Mode::single) {
        for (const auto& r : singly()) s.push_back(r.s);
    } else {
        for (const auto& r : doubly()) s.push_back(0.5 * (r.s_l + r.s_r));
    }
    if (s.empty()) throw InvalidInputError("empty dataset");
    std::sort(s.begin(), s.end());
    const auto mid = s.size() / 2;
    return s.size() % 2 == 1 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
}

Grid::Grid(std::vector<int> points) : points_(std::move(points))
{
    if (points_.empty()) throw InvalidInputError("grid must contain at least one point");
    for (std::size_t k = 1; k < points_.size(); ++k) {
        if (points_[k] <= points_[k - 1]) throw InvalidInputError("grid points must be strictly increasing");
    }
    if (points_.front() < 1) throw InvalidInputError("grid points must be positive");
}

Grid Grid::range(int first, int last)
{
    std::vector<int> pts(static_cast<std::size_t>(std::max(0, last - first + 1)));
    std::iota(pts.begin(), pts.end(), first);
    return Grid(std::move(pts));
}

std::optional<std::size_t> Grid::index_of(int day) const
{
    auto it = std::lower_bound(points_.begin(), points_.end(), day);
    if (it == points_.end() || *it != day) return std::nullopt;
    return static_cast<std::size_t>(it - points_.begin());
}

MassFunction::MassFunction(std::vector<int> support, std::vector<double> probs)
{
    if (support.size() != probs.size()) throw InvalidInputError("support and probabilities differ in length");
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (!(probs[k] >= 0.0) || !std::isfinite(probs[k])) {
            throw InvalidInputError("probabilities must be finite and nonnegative");
        }
        if (k > 0 && support[k] <= support[k - 1]) throw InvalidInputError("support must be strictly increasing");
        if (probs[k] > 0.0) {
            support_.push_back(support[k]);
            probs_.push_back(probs[k]);
        }
    }
    if (support_.empty()) throw InvalidInputError("mass function has no positive mass");
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) {
        for (auto& p : probs_) p /= total;
    }
}

MassFunction MassFunction::on_grid(const Grid& grid, const std::vector<double>& probs)
{
    if (probs.size() != grid.size()) throw InvalidInputError("mass vector does not match grid");
    return MassFunction(grid.points(), probs);
}

double MassFunction::mass_at(int day) const
{
    auto it = std::lower_bound(support_.begin(), support_.end(), day);
    if (it == support_.end() || *it != day) return 0.0;
    return probs_[static_cast<std::size_t>(it - support_.begin())];
}

double DayCdf::at(int day) const
{
    if (day < 1) return 0.0;
    if (day > last_day()) return 1.0;
    return values[static_cast<std::size_t>(day - 1)];
}

Dataset validate_dataset(const Dataset& raw)
{
    if (raw.empty()) throw InvalidInputError("dataset is empty");
    if (raw.mode() == Mode::single) {
        std::vector<SinglyObs> out = raw.singly();
        for (std::size_t i = 0; i < out.size(); ++i) {
            auto& r = out[i];
            if (r.e < 1) throw InvalidInputError("record " + std::to_string(i) + ": exposure must be >= 1", i);
            if (r.s < 1) throw InvalidInputError("record " + std::to_string(i) + ": symptom day must be >= 1", i);
            if (r.s < r.e) r.e = r.s;
        }
        return Dataset(std::move(out));
    }
    std::vector<DoublyObs> out = raw.doubly();
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& r = out[i];
        if (r.e < 1) throw InvalidInputError("record " + std::to_string(i) + ": exposure must be >= 1", i);
        if (r.s_l >= r.s_r) {
            throw InvalidInputError("record " + std::to_string(i) + ": symptom window needs s_l < s_r", i);
        }
        if (r.s_r < 1) throw InvalidInputError("record " + std::to_string(i) + ": s_r must be >= 1", i);
        r.s_l = std::max(r.s_l, 0);
    }
    return Dataset(std::move(out));
}

DayCdf cdf_from_mass(const MassFunction& mass, const Grid& grid)
{
    const int last = std::max(grid.back(), mass.support().back());
    DayCdf cdf;
    cdf.values.assign(static_cast<std::size_t>(last), 0.0);
    for (std::size_t k = 0; k < mass.size(); ++k) {
        cdf.values[static_cast<std::size_t>(mass.support()[k] - 1)] += mass.probs()[k];
    }
    std::partial_sum(cdf.values.begin(), cdf.values.end(), cdf.values.begin());
    return cdf;
}

Grid candidate_grid(const Dataset& data, std::optional<int> m1)
{
    if (data.empty()) throw InvalidInputError("dataset is empty");
    int last = data.max_symptom_day();
    if (m1) {
        if (*m1 < 1) throw InvalidInputError("m1 must be >= 1");
        last = std::max(last, *m1 + data.max_exposure());
    }
    return Grid::range(1, std::max(last, 1));
}

namespace {

template <typename Record>
Tally<Record> tally_impl(const std::vector<Record>& records)
{
    Tally<Record> out;
    std::map<Record, std::size_t> seen;
    for (const auto& r : records) {
        auto [it, inserted] = seen.try_emplace(r, out.records.size());
        if (inserted) {
            out.records.push_back(r);
            out.counts.push_back(1.0);
        } else {
            out.counts[it->second] += 1.0;
        }
    }
    return out;
}

} // namespace

Tally<SinglyObs> tally(const std::vector<SinglyObs>& records) { return tally_impl(records); }
Tally<DoublyObs> tally(const std::vector<DoublyObs>& records) { return tally_impl(records); }

} // namespace incubation
