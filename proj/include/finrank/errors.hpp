#pragma once

#include <stdexcept>
#include <string>

namespace finrank {

// Base class for all library errors. CLI maps these to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input stream (bad JSON line, bad CSV row). Carries the 1-based line number.
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
    std::size_t line_number;
};

// Duplicate (individual, encounter, image) triple.
struct ConflictError : Error {
    using Error::Error;
};

// Contour with zero arc length or zero extent along the requested axis.
struct DegenerateContourError : Error {
    using Error::Error;
};

// Mismatched vector/matrix dimensions between two operands.
struct DimensionError : Error {
    using Error::Error;
};

struct EmptyInputError : Error {
    using Error::Error;
};

// Two inputs that must describe the same query set (or the same run) disagree.
struct InconsistencyError : Error {
    using Error::Error;
};

// Argument outside its mathematical domain (e.g. Bernstein x outside [0,1]).
struct DomainError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace finrank
