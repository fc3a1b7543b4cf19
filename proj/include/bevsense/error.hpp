#pragma once

#include <stdexcept>
#include <string>

namespace bevsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a result (singular system, degenerate circuit, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent on-disk data. `where` names the row/column or JSON path.
class FormatError : public Error {
public:
    FormatError(std::string code, std::string where, const std::string& what)
        : Error(code + " at " + where + ": " + what), code_(std::move(code)), where_(std::move(where)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& where() const noexcept { return where_; }

private:
    std::string code_;
    std::string where_;
};

}  // namespace bevsense
