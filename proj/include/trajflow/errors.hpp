#pragma once

#include <stdexcept>
#include <string>

namespace trajflow {

// Base class for all library errors. Subclasses map onto CLI exit codes:
// config/usage problems -> 2, data problems -> 3, numeric failures -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched tensor shapes; message names the offending primitive.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value or combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside its mathematical domain (e.g. t outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

// API misuse (e.g. consuming a tape twice).
class UsageError : public Error {
public:
    using Error::Error;
};

// NaN/Inf where a finite value is required.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

// Malformed input data (bad rows, checksum mismatch, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Input file does not match the documented schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Dataset generation could not satisfy its contract.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Filesystem trouble.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace trajflow
