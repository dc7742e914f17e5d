// errors.hpp: exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace bbr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration. `key()` names the offending setting when known.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    explicit ConfigError(const std::string& what) : Error(what) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A kernel evaluation strategy declined the query (e.g. the oscillation budget was exceeded).
class StrategyRefused : public Error {
public:
    using Error::Error;
};

/// A matrix that should be a two-qubit density matrix is not one.
class NotAState : public Error {
public:
    using Error::Error;
};

/// Geometry of an effective-interaction mode sum is unusable.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A regime assumption of a cross-check does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A numerical search did not find what it was asked for.
class SearchError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace bbr
