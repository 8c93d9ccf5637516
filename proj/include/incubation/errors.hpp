#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace incubation {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    success = 0,
    failure = 1,
    non_convergence = 2,
    invalid_input = 3,
    infeasible = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::failure; }
};

/// Malformed or out-of-range input; `record` is the zero-based record index
/// or npos when the problem is not tied to one record.
class InvalidInputError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit InvalidInputError(const std::string& what, std::size_t record = npos)
        : Error(what), record_(record) {}

    std::size_t record() const noexcept { return record_; }
    ExitCode exit_code() const noexcept override { return ExitCode::invalid_input; }

private:
    std::size_t record_;
};

/// A record has zero likelihood weight on every grid point, or a criterion
/// was evaluated where some likelihood term vanishes.
class InfeasibleError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit InfeasibleError(const std::string& what, std::size_t record = npos)
        : Error(what), record_(record) {}

    std::size_t record() const noexcept { return record_; }
    ExitCode exit_code() const noexcept override { return ExitCode::infeasible; }

private:
    std::size_t record_;
};

/// Cholesky factorization met a non-positive pivot.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, long pivot) : Error(what), pivot_(pivot) {}
    long pivot() const noexcept { return pivot_; }

private:
    long pivot_;
};

/// Normal equations of a quadratic subproblem are singular on `support`.
class RankDeficientError : public Error {
public:
    RankDeficientError(const std::string& what, std::vector<int> support)
        : Error(what), support_(std::move(support)) {}
    const std::vector<int>& support() const noexcept { return support_; }

private:
    std::vector<int> support_;
};

class LineSearchError : public Error {
public:
    using Error::Error;
};

/// Observed Fisher information could not be formed (zero denominator or too
/// small a support).
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

} // namespace incubation
