#pragma once

#include <stdexcept>
#include <string>

namespace penning {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed argument: out-of-range index, non-positive field, negative rate.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a closed-form model (e.g. z <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// omega_c^2 <= 2 omega_z^2: radial motion unbound.
class StabilityViolation : public Error {
public:
    using Error::Error;
};

/// No interior maximum of the on-axis potential.
class NoTrap : public Error {
public:
    using Error::Error;
};

/// Root search exhausted its range without a sign change.
class NoSolution : public Error {
public:
    using Error::Error;
};

/// Fock-space truncation leaked more population than allowed.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration file or unknown key.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace penning
