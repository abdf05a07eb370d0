#pragma once

#include <stdexcept>
#include <string>

namespace boltz {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A configuration or state violates a model invariant.
class InvalidState : public Error {
public:
    using Error::Error;
};

class Singularity : public Error {
public:
    using Error::Error;
};

/// The requested model/sampler combination is not implemented.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Two events were scheduled within the time tolerance of each other.
class Degeneracy : public Error {
public:
    using Error::Error;
};

/// The request is well-formed but exceeds a deliberate resource bound.
class Refusal : public Error {
public:
    using Error::Error;
};

class Divergence : public Error {
public:
    using Error::Error;
};

/// Not enough data to form the requested estimate.
class InsufficientData : public Error {
public:
    using Error::Error;
};

}  // namespace boltz
