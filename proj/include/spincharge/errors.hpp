#pragma once

#include <stdexcept>
#include <string>

namespace spincharge {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside the operation's domain (non-positive rate, empty interval, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A detuning sign produces a non-positive mass or coupling while the
/// repulsive-only policy is active.
class SignViolation : public Error {
public:
    using Error::Error;
};

/// A zero detuning makes a derived parameter diverge.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// V12·K/(π·u) ≥ 1: the spin velocity is not real.
class DemixingInstability : public Error {
public:
    using Error::Error;
};

/// Non-finite field values or an over-large nonlinear phase per step.
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

class NoSignal : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Spectral branches merge or cannot be told apart.
class AmbiguityError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

} // namespace spincharge
