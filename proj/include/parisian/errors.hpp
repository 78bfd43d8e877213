#pragma once

#include <stdexcept>
#include <string>

namespace parisian {

// Argument outside the mathematical domain of an operation (negative theta, z <= 0, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Model parameters violate the family's constraints, or the drift is not positive.
class model_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration (simulation settings, CLI config, tolerances).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its tolerance: quadrature, root bracketing,
// Laplace inversion self-check, series truncation.
class numerics_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace parisian
