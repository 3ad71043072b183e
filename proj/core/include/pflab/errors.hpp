#pragma once

#include <stdexcept>
#include <string>

namespace pflab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Field construction and arithmetic.
struct NotPrimeError : Error { using Error::Error; };
struct TooSmallError : Error { using Error::Error; };
struct ZeroInverseError : Error { using Error::Error; };
struct DegenerateMapError : Error { using Error::Error; };
struct FieldMismatchError : Error { using Error::Error; };

// Geometry.
struct CoincidentPointsError : Error { using Error::Error; };

// Incidence counting.
struct TooFewPointsError : Error { using Error::Error; };
struct NotCartesianError : Error { using Error::Error; };

// Set operations.
struct ZeroDilateError : Error { using Error::Error; };
struct ZeroElementError : Error { using Error::Error; };
struct SearchTooLargeError : Error { using Error::Error; };

// Graph extraction.
struct HypothesisViolatedError : Error { using Error::Error; };

// Pipelines.
struct BadSlopeError : Error { using Error::Error; };

// Generators and records.
struct SizeExceedsFieldError : Error { using Error::Error; };
struct BadSubgroupOrderError : Error { using Error::Error; };
struct SchemaMismatchError : Error { using Error::Error; };
struct CorruptRecordError : Error { using Error::Error; };

/// Malformed external input (files, CLI payloads, config values).
struct InputError : Error { using Error::Error; };

/// Broken internal identity; indicates an implementation bug, not bad input.
struct InternalCheckError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace pflab
