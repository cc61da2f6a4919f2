#pragma once

#include <stdexcept>
#include <string>

namespace peerperf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (carries file/line context in the message).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input violating a domain constraint.
struct ValidationError : Error {
    using Error::Error;
};

// Missing or unexpected columns in an input file.
struct SchemaError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

// Too few observations / firms / peers for the requested computation.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Requested evaluation window extends beyond the available calendar.
struct CoverageError : Error {
    using Error::Error;
};

struct SingularDesignError : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    using Error::Error;
};

struct OptimizationError : Error {
    using Error::Error;
};

}  // namespace peerperf
