#pragma once

#include <stdexcept>
#include <string>

namespace spinach {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (empty query, malformed id, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A transport-level failure that survived all retries.
class NetworkError : public Error {
public:
    using Error::Error;
};

} // namespace spinach
