#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alloyopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Bounds on a composition space leave no point on the simplex.
class InfeasibleSpace : public Error {
public:
    using Error::Error;
};

/// Kernel matrix stayed non-positive-definite after the full jitter ladder.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

}  // namespace alloyopt
