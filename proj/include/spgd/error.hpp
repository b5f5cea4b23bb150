// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violations: non-finite values, bad sizes, empty sets.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Argument outside the region where a function is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed files or unreadable paths.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spgd
