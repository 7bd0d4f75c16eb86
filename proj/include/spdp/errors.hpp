#pragma once

#include <stdexcept>
#include <string>

namespace spdp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input or configuration (bad flag, out-of-range parameter).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed input data (I/O failure, bad encoding).
class LoadError : public Error {
public:
    using Error::Error;
};

/// Sampler state or serialized snapshot violates its consistency rules.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A Stirling number was requested beyond the pre-sized cache bound.
class CacheOverflowError : public Error {
public:
    using Error::Error;
};

/// Every weight of a categorical distribution is zero.
class DegenerateDistributionError : public Error {
public:
    using Error::Error;
};

/// The requested combination of features is not supported (e.g. a
/// non-identity transform in the parallel sampler).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace spdp
