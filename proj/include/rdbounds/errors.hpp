#pragma once

#include <stdexcept>
#include <string>

namespace rdbounds {

/// Malformed input: bad expression text, bad mesh, bad parameter values.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A standing assumption of an estimate is violated (e.g. a Robin boundary
/// where the estimate needs S_T = S_D). The CLI maps this to exit code 2.
class AssumptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A guaranteed bound failed against a known exact error. Exit code 3.
class BoundViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure (non-SPD system, increasing optimizer step).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rdbounds
