#pragma once

#include <stdexcept>
#include <string>

namespace wsc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of a spectral function (inside or at the bulk,
// sub-threshold spike, etc).
struct DomainError : Error {
    using Error::Error;
};

// Sample covariance numerically singular, or m < p.
struct IllConditionedError : Error {
    using Error::Error;
};

// Matrix shapes incompatible.
struct DimensionError : Error {
    using Error::Error;
};

// Finite-sample violation of the norm identity while estimating tau; the
// offending spike is dropped (eta = 0) rather than aborting.
struct DegenerateSpikeError : Error {
    using Error::Error;
};

struct InvalidRankError : Error {
    using Error::Error;
};

// Too few bulk singular values to estimate the D-transform derivative.
struct InsufficientBulkError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace wsc
