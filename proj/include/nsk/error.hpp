#pragma once

#include <stdexcept>
#include <string>

namespace nsk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent sizes, invalid indices or manifests.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (r < 1, t < s, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Physical state violates an invariant (vacuum, NaN).
class StateError : public Error {
public:
    using Error::Error;
};

/// Parameters outside the parabolic regime where a real effective velocity exists.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Gevrey amplification would overflow or touch modes above the declared cap.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Smallness or band-limitation precondition of a check is not met.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Quadrature failed to converge under refinement.
class RefinementError : public Error {
public:
    using Error::Error;
};

}  // namespace nsk
