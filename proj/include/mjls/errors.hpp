#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mjls {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document. `path()` names the offending field, e.g.
/// `/chain/P/1`.
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A requested object would exceed a configured size limit (matrix entries,
/// enumerated modes).
class LimitError : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t budget)
        : Error(what + " (iteration budget " + std::to_string(budget) + ")"), budget_(budget) {}

    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t budget_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace mjls
