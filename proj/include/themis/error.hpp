#pragma once

#include <stdexcept>
#include <string>

namespace themis {

// Base for all library errors; subclasses let callers distinguish
// bad input from internal state problems.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed policy text, unknown level kinds, bad scenario fields.
struct ParseError : Error {
    using Error::Error;
};

// Same job id reported with different immutable attributes.
struct IntegrityError : Error {
    using Error::Error;
};

// Operation requires at least one active job / pending request.
struct EmptyError : Error {
    using Error::Error;
};

} // namespace themis
