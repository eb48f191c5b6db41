#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace advhar {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Tensor extents do not line up for the requested operation.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// A caller broke an operation's precondition (e.g. backward on a non-scalar).
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Input data could not be ingested or transformed.
class DataError : public Error {
  public:
    using Error::Error;
};

/// A training loss became non-finite.
class DivergenceError : public Error {
  public:
    DivergenceError(std::string component, const std::string &what)
        : Error(what), component_(std::move(component)) {}

    const std::string &component() const noexcept { return component_; }

  private:
    std::string component_;
};

}  // namespace advhar
