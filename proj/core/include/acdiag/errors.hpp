#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acdiag {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected input text; offset is a 0-based byte position into the source.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation left the mathematical domain (log of a non-positive number,
// division by zero, ...). Never reported as a silent NaN.
class EvalError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Numerical procedure could not meet its contract (refinement budget
// exhausted, no convergent bracket, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace acdiag
