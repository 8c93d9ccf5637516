#pragma once

#include <iosfwd>
#include <string>

#include "incubation/core.hpp"
#include "incubation/simulate.hpp"

namespace incubation {

// Data files: header `e,s` (singly) or `e,sl,sr` (doubly), one integer record
// per line. Blank lines are skipped. Records are not normalized here; pass the
// result through validate_dataset.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data);

// `day,mass,fbar` for days 1..cdf.last_day().
void write_estimate(std::ostream& out, const MassFunction& mass, const DayCdf& cdf);

// `day,fbar` for days 1..last_day.
void write_truth(std::ostream& out, const TruthSpec& truth, int last_day);

// Writes `text` to `path`, throwing on failure.
void write_file(const std::string& path, const std::string& text);

} // namespace incubation
