#pragma once
#include <stdexcept>
#include <string>

namespace nonholo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A chart point (or a finite-difference stencil point) left the chart domain.
struct OutOfChart : Error {
    using Error::Error;
};

/// The frame columns together with the complement fail to span R^n.
struct DegenerateFrame : Error {
    using Error::Error;
};

struct NotOrbitTangent : Error {
    using Error::Error;
};

struct InconsistentGenerators : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct ShapeSingularity : Error {
    using Error::Error;
};

struct FloquetViolation : Error {
    using Error::Error;
};

struct AdaptedBasisDegenerate : Error {
    using Error::Error;
};

struct DegenerateDenominator : Error {
    using Error::Error;
};

struct PoleRegularizationFailure : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace nonholo
