#pragma once

#include <stdexcept>
#include <string>

namespace hybridsim {

/// Malformed or inconsistent configuration / scenario input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The composed intensity row exceeded the uniformization bound lambda.
/// This is a hard modelling error: thinning is only valid under the bound.
class BoundViolationError : public std::runtime_error {
public:
    BoundViolationError(const std::string& what, double time, double total_exit, double lambda)
        : std::runtime_error(what), time(time), total_exit(total_exit), lambda(lambda) {}
    double time;
    double total_exit;
    double lambda;
};

/// A micro-solver produced a non-finite state.
class SolverBlowupError : public std::runtime_error {
public:
    SolverBlowupError(const std::string& what, double last_finite_time)
        : std::runtime_error(what), last_finite_time(last_finite_time) {}
    double last_finite_time;
};

/// A requested allocation would exceed the in-memory budget.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure, carries the offending path in the message.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hybridsim
