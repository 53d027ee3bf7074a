#pragma once

#include <stdexcept>
#include <string>

namespace fracspde {

/// A parameter is outside the domain an operation accepts.
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// The request is well-formed but outside the range where the result is validated.
class OutOfRange : public std::out_of_range {
public:
    explicit OutOfRange(const std::string& what) : std::out_of_range(what) {}
};

/// Operands disagree in dimension, cutoff or grid.
class ShapeError : public std::logic_error {
public:
    explicit ShapeError(const std::string& what) : std::logic_error(what) {}
};

/// Filesystem or serialization failure, always carrying the offending path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracspde
