#pragma once

#include <stdexcept>
#include <string>

namespace billiard {

// Malformed arguments: dimension mismatch, out-of-range parameters, schema violations.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A point that should lie on the boundary does not.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A chord direction that does not point into the body.
class DirectionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The body oracle behaved inconsistently (e.g. a ray root could not be bracketed).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative numerics failed to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace billiard
