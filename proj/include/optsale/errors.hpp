#pragma once

#include <stdexcept>
#include <string>

namespace optsale {

/// Invalid model/utility/config parameters. Raised eagerly at construction so
/// downstream code may assume invariants.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called on an input class it does not support
/// (e.g. power-utility reduction of a log-utility problem).
class usage_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical routine failed to converge. The message carries diagnostics
/// (achieved error estimate, bracket state).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace optsale
