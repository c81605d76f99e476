#pragma once

#include <stdexcept>
#include <string>

namespace ricci_dynamo {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateMetric : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class DivisionByZero : public Error {
public:
    using Error::Error;
};

/// Extrapolants of an eta -> 0 limit disagree by more than the consistency gate.
class NonConvergent : public Error {
public:
    using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
class NoConvergence : public Error {
public:
    using Error::Error;
};

class StepUnstable : public Error {
public:
    using Error::Error;
};

class NegativeDensity : public Error {
public:
    using Error::Error;
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ricci_dynamo
