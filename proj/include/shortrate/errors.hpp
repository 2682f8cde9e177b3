#pragma once

#include <stdexcept>
#include <string>

namespace shortrate {

/// Rejected parameters or arguments outside a model's domain.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested problem has no finite value, or finiteness is not established.
class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver or estimator failed an internal check (monotonicity, divergence, conditioning).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace shortrate
