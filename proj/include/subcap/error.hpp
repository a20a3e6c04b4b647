#pragma once

#include <stdexcept>
#include <string>

namespace subcap {

// Argument outside the mathematical domain of a formula (e.g. log M with M = 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested subspace dimension is incompatible with the basis or covariance.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Problem too large for the dense eigensolvers.
class SizeExceededError : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace subcap
