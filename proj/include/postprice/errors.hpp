#pragma once

#include <stdexcept>
#include <string>

namespace postprice {

// Argument outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid setup, instance or configuration.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Operation not defined for the given cost kind.
struct unsupported_operation : std::logic_error {
    using std::logic_error::logic_error;
};

// Base for numerical failures (integration, root bracketing, stitching).
struct computation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct integration_failure : computation_error {
    using computation_error::computation_error;
};

struct bracket_failure : computation_error {
    using computation_error::computation_error;
};

struct inconsistency_error : computation_error {
    using computation_error::computation_error;
};

}  // namespace postprice
