#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace delaynorm {

/// Base class for all library errors.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Invalid matrix dimensions or violated structural invariants at construction.
class ConstructionError : public Error {
   public:
    using Error::Error;
};

/// Malformed or inconsistent system description file.
class ParseError : public Error {
   public:
    using Error::Error;
};

/// The causality condition on the algebraic part failed (U^T A0 V singular).
class CausalityError : public Error {
   public:
    using Error::Error;
};

/// Stability assumptions violated (pole on the imaginary axis, or an
/// unbounded asymptotic norm).
class StabilityError : public Error {
   public:
    using Error::Error;
};

/// Frequency-response evaluation requested too close to a pole.
class PoleProximityError : public Error {
   public:
    PoleProximityError(const std::string& msg, std::complex<double> s) : Error(msg), point(s) {}
    std::complex<double> point;
};

/// Dense eigensolver backend failure.
class EigensolverError : public Error {
   public:
    using Error::Error;
};

/// Zero-pole-gain extraction failed validation against the descriptor model.
class ExtractionError : public Error {
   public:
    using Error::Error;
};

}  // namespace delaynorm
