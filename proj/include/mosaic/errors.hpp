#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

/// Malformed or inconsistent input (unknown ids, mismatched object sets).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A skill parameter outside its declared range.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation called in a state that does not satisfy its precondition.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Skill used in a role it does not support (e.g. pick as a connector).
struct CapabilityError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Graph insertion rejected (continuity violated, negative cost, bad endpoints).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cost requested for an outcome with no valid trajectory.
struct UndefinedCostError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mosaic
