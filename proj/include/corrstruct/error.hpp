#pragma once

#include <stdexcept>
#include <string>

namespace corrstruct {

enum class ErrorKind { input, numerical };

/// Base for every failure raised by the library. The CLI maps the kind to an
/// exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed or inconsistent input data or arguments.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// A computation that cannot produce a meaningful result (zero variance,
/// ill-defined eigenportfolio, eigensolver failure).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace corrstruct
