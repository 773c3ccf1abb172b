#pragma once

#include <stdexcept>
#include <string>

namespace airfedga {

// Base for every error the library throws on bad input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad experiment/model configuration (dimensions, hyper-parameters, keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inputs that violate an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-physical channel state, e.g. a non-positive gain.
class ChannelError : public Error {
 public:
  using Error::Error;
};

// Arguments outside a formula's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace airfedga
