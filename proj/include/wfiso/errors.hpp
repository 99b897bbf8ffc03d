#pragma once

#include <stdexcept>
#include <string>

namespace wfiso {

/// Bad arguments supplied by a caller (CLI exit code 2).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable input data (CLI exit code 3).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A pipeline invariant was violated. Indicates a bug, never bad input.
class PipelineError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

#define WFISO_ASSERT(cond, msg)                                                        \
    do {                                                                               \
        if (!(cond)) throw ::wfiso::PipelineError(std::string(msg) + " [" #cond "]"); \
    } while (0)

}  // namespace wfiso
