#pragma once

#include <stdexcept>
#include <string>

namespace rankattack {

/// Base for every error the library raises. The CLI maps subclasses onto
/// exit codes (2 usage, 3 backend/IO, 4 numeric).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an argument that violates a precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// Failure reading or writing corpus/model/report files.
class IoError : public Error {
public:
    using Error::Error;
};

/// Base for embedding backend failures.
class BackendError : public Error {
public:
    using Error::Error;
};

/// Network-level failure talking to a remote embedding service. Retriable.
class TransportError : public BackendError {
public:
    TransportError(const std::string& what, std::string cause)
        : BackendError(what + ": " + cause), cause_(std::move(cause)) {}

    bool retriable() const noexcept { return true; }
    const std::string& cause() const noexcept { return cause_; }

private:
    std::string cause_;
};

/// The remote service answered, but not in the agreed wire format.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Non-finite values during training or scoring.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace rankattack
