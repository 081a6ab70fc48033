#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation (e.g. s < 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-range user input (bad distribution spec, lambda <= 0, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The requested model is valid but not covered by this operation (e.g. m != 3).
class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

/// A closed form would divide by (numerically) zero in this parameter regime.
class DegenerateRegime : public Error {
public:
    using Error::Error;
};

/// A simulation produced too little data to form an estimate.
class NoDataError : public Error {
public:
    using Error::Error;
};

/// Internal invariant broken; indicates a bug rather than bad input.
class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace aoi
