#pragma once

#include <stdexcept>
#include <string>

namespace itv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called with arguments outside its contract.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Exact enumeration would exceed the configured state-space cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Conditioning on an event of probability zero.
class UndefinedConditionalError : public Error {
public:
    using Error::Error;
};

/// Malformed model or configuration input.
class InputError : public Error {
public:
    using Error::Error;
};

/// A witness construction was requested for a graph shape it does not cover.
class UnsupportedCaseError : public Error {
public:
    using Error::Error;
};

}  // namespace itv
