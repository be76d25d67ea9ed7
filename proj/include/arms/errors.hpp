#pragma once

#include <stdexcept>
#include <string>

namespace arms {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameters or configuration (bad W_m/eta divisibility, unknown
/// engine, malformed config file, ...). CLI exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Malformed input data: unparseable line, out-of-bounds coordinate,
/// decreasing timestamp. Messages carry the offending line number where
/// one exists. CLI exit code 3.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// File could not be opened, read or written. CLI exit code 3.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// A function received an argument outside its domain (empty angle set,
/// zero duration, non-overlapping series, ...). CLI exit code 3.
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

/// Correlation is undefined because one input series has zero variance.
class ZeroVarianceError : public Error {
public:
    explicit ZeroVarianceError(const std::string& msg) : Error(msg) {}
};

/// A fixed-width integer accumulator left its representable range.
class AccumulatorOverflowError : public Error {
public:
    explicit AccumulatorOverflowError(const std::string& msg) : Error(msg) {}
};

} // namespace arms
