#pragma once

#include <stdexcept>
#include <string>

namespace grb {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument values (empty sets, invalid sizes, non-finite inputs).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Mismatched vector/operator dimensions or foreign spaces.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Value outside an admissible interval; carries the offending value.
class OutOfRangeError : public Error {
public:
    OutOfRangeError(const std::string& msg, double value)
        : Error(msg), value_(value) {}
    double value() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

// Linear solver failures (singular or badly conditioned systems).
class SolverError : public Error {
public:
    using Error::Error;
};

// Corrupt, truncated, or version-mismatched model artifacts.
class ArtifactError : public Error {
public:
    using Error::Error;
};

// Requested data was not stored (e.g. reconstruction without bases).
class UnavailableError : public Error {
public:
    using Error::Error;
};

}  // namespace grb
