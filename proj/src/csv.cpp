#include "incubation/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "incubation/errors.hpp"

namespace incubation {

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<int> parse_fields(const std::string& line, std::size_t expected, std::size_t record)
{
    std::vector<int> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        int value = 0;
        const auto* end = field.data() + field.size();
        const auto [ptr, ec] = std::from_chars(field.data(), end, value);
        if (field.empty() || ec != std::errc() || ptr != end) {
            throw InvalidInputError("record " + std::to_string(record) + ": field '" + field + "' is not an integer",
                                    record);
        }
        out.push_back(value);
    }
    if (out.size() != expected) {
        throw InvalidInputError("record " + std::to_string(record) + ": expected " + std::to_string(expected) +
                                    " fields, got " + std::to_string(out.size()),
                                record);
    }
    return out;
}

} // namespace

Dataset read_dataset(std::istream& in)
{
    std::string line;
    std::string header;
    while (std::getline(in, line)) {
        header = trim(line);
        if (!header.empty()) break;
    }
    std::string compact;
    for (char c : header) {
        if (c != ' ' && c != '\t') compact += c;
    }
    std::vector<SinglyObs> singly;
    std::vector<DoublyObs> doubly;
    std::size_t width = 0;
    if (compact == "e,s") width = 2;
    else if (compact == "e,sl,sr") width = 3;
    else throw InvalidInputError("unrecognized header '" + header + "' (expected e,s or e,sl,sr)");

    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = parse_fields(line, width, record);
        if (width == 2) singly.push_back({f[0], f[1]});
        else doubly.push_back({f[0], f[1], f[2]});
        ++record;
    }
    if (record == 0) throw InvalidInputError("dataset has no records");
    return width == 2 ? Dataset(std::move(singly)) : Dataset(std::move(doubly));
}

Dataset read_dataset_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open '" + path + "'");
    return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data)
{
    if (data.mode() == Mode::single) {
        out << "e,s\n";
        for (const auto& r : data.singly()) out << r.e << ',' << r.s << '\n';
    } else {
        out << "e,sl,sr\n";
        for (const auto& r : data.doubly()) out << r.e << ',' << r.s_l << ',' << r.s_r << '\n';
    }
}

void write_estimate(std::ostream& out, const MassFunction& mass, const DayCdf& cdf)
{
    out << "day,mass,fbar\n";
    char line[128];
    for (int day = 1; day <= cdf.last_day(); ++day) {
        std::snprintf(line, sizeof line, "%d,%.12f,%.12f\n", day, mass.mass_at(day), cdf.at(day));
        out << line;
    }
}

void write_truth(std::ostream& out, const TruthSpec& truth, int last_day)
{
    out << "day,fbar\n";
    char line[96];
    for (int day = 1; day <= last_day; ++day) {
        std::snprintf(line, sizeof line, "%d,%.12f\n", day, true_fbar(truth, day));
        out << line;
    }
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write to '" + path + "' failed");
}

} // namespace incubation
