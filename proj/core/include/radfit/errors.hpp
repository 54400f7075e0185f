#pragma once

#include <stdexcept>
#include <string>

namespace radfit {

// Error taxonomy mirrored by the CLI exit codes: usage errors are handled by
// the argument parser, DataError/ParseError/FormatError/IoError map to exit
// code 2, ContractError to exit code 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (out-of-range counts, non-positive rates).
struct DomainError : Error {
    using Error::Error;
};

// Input data violates a documented precondition (negative fluence, degenerate
// sweep, criterion never crossed).
struct DataError : Error {
    using Error::Error;
};

// Text could not be parsed; message carries the offending line number.
struct ParseError : Error {
    using Error::Error;
};

// A structured file has the wrong shape (column count mismatch, bad header).
struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// API misuse between modules (schema mismatch, outlier rows where none are
// allowed). Indicates a caller bug, not bad data.
struct ContractError : Error {
    using Error::Error;
};

}  // namespace radfit
